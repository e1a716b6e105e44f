// cgo — complex-geometric-optics pipeline for 1-D symmetric hyperbolic systems.

#include <CLI11.hpp>
#include <iostream>

#include "cgo/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"complex geometric optics for 1-D symmetric hyperbolic systems"};
    std::string config_path;
    std::string command = "all";
    std::string out_dir;
    std::string eps_arg;
    long long seed = -1;
    app.add_option("--config", config_path, "model configuration file")->required();
    app.add_option("--command", command,
                   "check | phase | transport | assemble | sweep | compare | all");
    app.add_option("--out", out_dir, "output directory (overrides [run] out)");
    app.add_option("--eps", eps_arg, "comma/space separated epsilon ladder override");
    app.add_option("--seed", seed, "random seed override");
    CLI11_PARSE(app, argc, argv);

    try {
        cgo::ModelConfig cfg = cgo::load_config_file(config_path);
        if (!eps_arg.empty()) {
            for (auto& ch : eps_arg)
                if (ch == ',') ch = ' ';
            std::istringstream is(eps_arg);
            cfg.numerics.eps_list.clear();
            double v;
            while (is >> v) cfg.numerics.eps_list.push_back(v);
            if (cfg.numerics.eps_list.empty())
                throw cgo::ConfigError("--eps lists no values");
        }
        if (seed >= 0) cfg.numerics.seed = (unsigned long long)seed;

        const cgo::RunArtifacts art = cgo::run_command(cfg, command, out_dir);
        for (const auto& note : art.notes) std::cout << note << "\n";
        for (const auto& rep : art.reports) std::cout << rep.verdict() << "\n";
        std::cout << (art.all_passed ? "ALL PASS" : "FAILURES PRESENT") << std::endl;
        return art.all_passed ? 0 : 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return cgo::exit_code_for(e);
    }
}
