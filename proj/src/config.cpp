#include "cgo/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace cgo {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<double> parse_number_list(const std::string& s, int line) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        try {
            size_t used = 0;
            double v = std::stod(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (...) {
            throw SyntaxError("malformed number '" + tok + "'", line, 1);
        }
    }
    return out;
}

const std::set<std::string> known_system_keys = {
    "model", "n", "mode", "t_final", "xbar", "rho", "c", "k_radius"};
const std::set<std::string> known_numerics_keys = {
    "grid_nt", "grid_nx", "g", "s0", "rk_steps", "rect_tol", "picard_tol",
    "picard_max", "eps", "seed", "e_outside", "e_representative", "eig_fd_step",
    "sweep_set"};
const std::set<std::string> known_run_keys = {"out", "command"};

bool is_matrix_entry(const std::string& key) {
    // A11, F1, u01 ... entry keys are validated against N later.
    if (key.size() >= 3 && key[0] == 'a')
        return std::isdigit(unsigned(key[1])) && std::isdigit(unsigned(key[2]));
    if (key.size() >= 2 && key[0] == 'f') return std::isdigit(unsigned(key[1]));
    if (key.size() >= 3 && key.substr(0, 2) == "u0") return std::isdigit(unsigned(key[2]));
    return false;
}

std::string lower(std::string s) {
    for (auto& c : s) c = char(std::tolower(unsigned(c)));
    return s;
}

} // namespace

bool RawConfig::has(const std::string& sec, const std::string& key) const {
    return find(sec, key) != nullptr;
}

const RawConfig::Value* RawConfig::find(const std::string& sec, const std::string& key) const {
    auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
}

RawConfig parse_raw_config(const std::string& text) {
    RawConfig cfg;
    std::istringstream is(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#' || s[0] == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw SyntaxError("unterminated section header", lineno, int(line.find('[')) + 1);
            section = lower(trim(s.substr(1, s.size() - 2)));
            if (section.empty())
                throw SyntaxError("empty section name", lineno, 1);
            cfg.sections[section]; // create
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw SyntaxError("expected 'key = value'", lineno, 1);
        std::string key = lower(trim(line.substr(0, eq)));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw SyntaxError("empty key", lineno, 1);
        if (section.empty())
            throw SyntaxError("key outside of a [section]", lineno, 1);
        // strip surrounding quotes on values
        if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
            val = val.substr(1, val.size() - 2);
        cfg.sections[section][key] = {val, lineno};
    }
    return cfg;
}

namespace {

double get_num(const RawConfig& raw, const std::string& sec, const std::string& key,
               double fallback) {
    const auto* v = raw.find(sec, key);
    if (!v) return fallback;
    try {
        return std::stod(v->text);
    } catch (...) {
        throw TypeMismatch("[" + sec + "] " + key + ": expected a number, got '" + v->text +
                           "' (line " + std::to_string(v->line) + ")");
    }
}

std::string get_str(const RawConfig& raw, const std::string& sec, const std::string& key,
                    const std::string& fallback) {
    const auto* v = raw.find(sec, key);
    return v ? v->text : fallback;
}

Expr get_expr(const RawConfig& raw, const std::string& sec, const std::string& key, int line_hint) {
    const auto* v = raw.find(sec, key);
    if (!v)
        throw UnknownKey("missing required key [" + sec + "] " + key +
                         (line_hint ? " (near line " + std::to_string(line_hint) + ")" : ""));
    try {
        return parse_expr(v->text);
    } catch (const SyntaxError& e) {
        throw SyntaxError("[" + sec + "] " + key + ": " + e.what(), v->line, e.column);
    }
}

} // namespace

ModelConfig parse_config(const std::string& text) {
    RawConfig raw = parse_raw_config(text);
    ModelConfig cfg;

    if (!raw.sections.count("system"))
        throw UnknownKey("missing [system] section");

    // unknown-key detection in fixed sections
    for (const auto& [key, val] : raw.sections.at("system")) {
        if (!known_system_keys.count(key) && !is_matrix_entry(key))
            throw UnknownKey("[system] unknown key '" + key + "' (line " +
                             std::to_string(val.line) + ")");
    }
    if (raw.sections.count("numerics"))
        for (const auto& [key, val] : raw.sections.at("numerics"))
            if (!known_numerics_keys.count(key))
                throw UnknownKey("[numerics] unknown key '" + key + "' (line " +
                                 std::to_string(val.line) + ")");
    if (raw.sections.count("run"))
        for (const auto& [key, val] : raw.sections.at("run"))
            if (!known_run_keys.count(key))
                throw UnknownKey("[run] unknown key '" + key + "' (line " +
                                 std::to_string(val.line) + ")");

    cfg.registry = get_str(raw, "system", "model", "");
    cfg.N = int(get_num(raw, "system", "n", 0));
    cfg.mode = get_str(raw, "system", "mode", "");
    auto opt_num = [&](const char* key) -> std::optional<double> {
        if (!raw.has("system", key)) return std::nullopt;
        return get_num(raw, "system", key, 0.0);
    };
    cfg.T = opt_num("t_final");
    cfg.xbar = opt_num("xbar");
    cfg.rho = opt_num("rho");
    cfg.c = opt_num("c");
    cfg.K_radius = opt_num("k_radius");

    if (cfg.registry.empty()) {
        if (cfg.N <= 0)
            throw TypeMismatch("[system] n must be a positive integer for custom models");
        if (cfg.mode != "quasilinear" && cfg.mode != "semilinear")
            throw TypeMismatch("[system] mode must be 'quasilinear' or 'semilinear'");
        for (const auto& [key, val] : raw.sections.at("system")) {
            if (!is_matrix_entry(key)) continue;
            try {
                cfg.system_entries[key] = parse_expr(val.text);
            } catch (const SyntaxError& e) {
                throw SyntaxError("[system] " + key + ": " + e.what(), val.line, e.column);
            }
        }
    }

    // phases
    if (raw.sections.count("phases")) {
        const auto& ph = raw.sections.at("phases");
        int m = int(get_num(raw, "phases", "m", 0));
        if (m <= 0) throw TypeMismatch("[phases] m must be a positive integer");
        for (const auto& [key, val] : ph) {
            if (key == "m") continue;
            bool ok = key.rfind("psi_", 0) == 0 || key.rfind("zeros_", 0) == 0 ||
                      key.rfind("branch_", 0) == 0 || key.rfind("h_", 0) == 0;
            if (!ok)
                throw UnknownKey("[phases] unknown key '" + key + "' (line " +
                                 std::to_string(val.line) + ")");
        }
        for (int mu = 1; mu <= m; ++mu) {
            PhaseSpec spec;
            const std::string suffix = std::to_string(mu);
            spec.psi = get_expr(raw, "phases", "psi_" + suffix, 0);
            const auto* z = raw.find("phases", "zeros_" + suffix);
            if (!z) throw UnknownKey("missing [phases] zeros_" + suffix);
            spec.zeros = parse_number_list(z->text, z->line);
            if (spec.zeros.empty())
                throw TypeMismatch("[phases] zeros_" + suffix + " must list at least one point");
            spec.branch = int(get_num(raw, "phases", "branch_" + suffix, 1));
            for (int k = 1;; ++k) {
                const std::string hkey = "h_" + suffix + "_" + std::to_string(k);
                if (!raw.has("phases", hkey)) break;
                spec.amplitude.push_back(get_expr(raw, "phases", hkey, 0));
            }
            if (spec.amplitude.empty())
                throw UnknownKey("missing [phases] h_" + suffix + "_1 ...");
            cfg.phases.push_back(std::move(spec));
        }
    }

    // numerics
    cfg.numerics.grid_nt = int(get_num(raw, "numerics", "grid_nt", 201));
    cfg.numerics.grid_nx = int(get_num(raw, "numerics", "grid_nx", 201));
    cfg.numerics.G = int(get_num(raw, "numerics", "g", 8));
    cfg.numerics.s0_override = get_num(raw, "numerics", "s0", 0.0);
    cfg.numerics.rk_steps = int(get_num(raw, "numerics", "rk_steps", 400));
    cfg.numerics.rect_tol = get_num(raw, "numerics", "rect_tol", 1e-12);
    cfg.numerics.picard_tol = get_num(raw, "numerics", "picard_tol", 1e-10);
    cfg.numerics.picard_max = int(get_num(raw, "numerics", "picard_max", 40));
    cfg.numerics.seed = (unsigned long long)(get_num(raw, "numerics", "seed", 20240811.0));
    cfg.numerics.e_outside = get_str(raw, "numerics", "e_outside", "identity");
    cfg.numerics.e_representative = get_str(raw, "numerics", "e_representative", "taylor2");
    cfg.numerics.sweep_set = get_str(raw, "numerics", "sweep_set", "core");
    if (cfg.numerics.sweep_set != "core" && cfg.numerics.sweep_set != "full" &&
        cfg.numerics.sweep_set != "none")
        throw TypeMismatch("[numerics] sweep_set must be 'none', 'core' or 'full'");
    cfg.numerics.eig_fd_step = get_num(raw, "numerics", "eig_fd_step", 0.0);
    if (cfg.numerics.e_outside != "identity" && cfg.numerics.e_outside != "zero")
        throw TypeMismatch("[numerics] e_outside must be 'identity' or 'zero'");
    if (cfg.numerics.e_representative != "taylor2" && cfg.numerics.e_representative != "fullfield")
        throw TypeMismatch("[numerics] e_representative must be 'taylor2' or 'fullfield'");
    if (raw.has("numerics", "eps")) {
        const auto* v = raw.find("numerics", "eps");
        cfg.numerics.eps_list = parse_number_list(v->text, v->line);
    } else {
        for (int k = 0; k <= 4; ++k) cfg.numerics.eps_list.push_back(0.2 * std::pow(2.0, -k));
    }
    if (cfg.numerics.grid_nt < 9 || cfg.numerics.grid_nx < 9)
        throw TypeMismatch("[numerics] grid sizes must be at least 9");
    if (cfg.numerics.G < 1) throw TypeMismatch("[numerics] g must be >= 1");
    if (cfg.numerics.rk_steps < 4) throw TypeMismatch("[numerics] rk_steps must be >= 4");
    for (double e : cfg.numerics.eps_list)
        if (!(e > 0)) throw TypeMismatch("[numerics] eps values must be positive");
    for (const auto& [nm, v] : {std::pair<const char*, std::optional<double>>{"t_final", cfg.T},
                                {"rho", cfg.rho},
                                {"c", cfg.c},
                                {"k_radius", cfg.K_radius}})
        if (v && !(*v > 0)) throw TypeMismatch(std::string("[system] ") + nm + " must be positive");

    cfg.run.out_dir = get_str(raw, "run", "out", "out");
    cfg.run.command = get_str(raw, "run", "command", "all");
    return cfg;
}

ModelConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string ModelConfig::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "[system]\n";
    if (!registry.empty()) os << "model = " << registry << "\n";
    if (N > 0) os << "n = " << N << "\n";
    if (!mode.empty()) os << "mode = " << mode << "\n";
    if (T) os << "t_final = " << *T << "\n";
    if (xbar) os << "xbar = " << *xbar << "\n";
    if (rho) os << "rho = " << *rho << "\n";
    if (c) os << "c = " << *c << "\n";
    if (K_radius) os << "k_radius = " << *K_radius << "\n";
    for (const auto& [k, e] : system_entries) os << k << " = \"" << e.text() << "\"\n";
    if (!phases.empty()) {
        os << "\n[phases]\n";
        os << "m = " << phases.size() << "\n";
        for (size_t mu = 0; mu < phases.size(); ++mu) {
            const auto& p = phases[mu];
            const std::string sfx = std::to_string(mu + 1);
            os << "psi_" << sfx << " = \"" << p.psi.text() << "\"\n";
            os << "zeros_" << sfx << " =";
            for (double z : p.zeros) os << " " << z;
            os << "\n";
            os << "branch_" << sfx << " = " << p.branch << "\n";
            for (size_t k = 0; k < p.amplitude.size(); ++k)
                os << "h_" << sfx << "_" << (k + 1) << " = \"" << p.amplitude[k].text() << "\"\n";
        }
    }
    os << "\n[numerics]\n";
    os << "grid_nt = " << numerics.grid_nt << "\n";
    os << "grid_nx = " << numerics.grid_nx << "\n";
    os << "g = " << numerics.G << "\n";
    if (numerics.s0_override > 0) os << "s0 = " << numerics.s0_override << "\n";
    os << "rk_steps = " << numerics.rk_steps << "\n";
    os << "rect_tol = " << numerics.rect_tol << "\n";
    os << "picard_tol = " << numerics.picard_tol << "\n";
    os << "picard_max = " << numerics.picard_max << "\n";
    os << "eps =";
    for (double e : numerics.eps_list) os << " " << e;
    os << "\n";
    os << "seed = " << numerics.seed << "\n";
    os << "e_outside = " << numerics.e_outside << "\n";
    os << "e_representative = " << numerics.e_representative << "\n";
    os << "sweep_set = " << numerics.sweep_set << "\n";
    if (numerics.eig_fd_step > 0) os << "eig_fd_step = " << numerics.eig_fd_step << "\n";
    os << "\n[run]\n";
    os << "out = " << run.out_dir << "\n";
    os << "command = " << run.command << "\n";
    return os.str();
}

bool config_equal(const ModelConfig& a, const ModelConfig& b) {
    if (a.registry != b.registry || a.N != b.N || a.mode != b.mode) return false;
    if (a.T != b.T || a.xbar != b.xbar || a.rho != b.rho || a.c != b.c ||
        a.K_radius != b.K_radius)
        return false;
    if (a.system_entries.size() != b.system_entries.size()) return false;
    for (const auto& [k, e] : a.system_entries) {
        auto it = b.system_entries.find(k);
        if (it == b.system_entries.end() || !e.structurally_equal(it->second)) return false;
    }
    if (a.phases.size() != b.phases.size()) return false;
    for (size_t i = 0; i < a.phases.size(); ++i) {
        const auto& p = a.phases[i];
        const auto& q = b.phases[i];
        if (!p.psi.structurally_equal(q.psi) || p.zeros != q.zeros || p.branch != q.branch)
            return false;
        if (p.amplitude.size() != q.amplitude.size()) return false;
        for (size_t k = 0; k < p.amplitude.size(); ++k)
            if (!p.amplitude[k].structurally_equal(q.amplitude[k])) return false;
    }
    const auto& x = a.numerics;
    const auto& y = b.numerics;
    if (x.grid_nt != y.grid_nt || x.grid_nx != y.grid_nx || x.G != y.G ||
        x.s0_override != y.s0_override || x.rk_steps != y.rk_steps ||
        x.rect_tol != y.rect_tol || x.picard_tol != y.picard_tol ||
        x.picard_max != y.picard_max || x.eps_list != y.eps_list || x.seed != y.seed ||
        x.e_outside != y.e_outside || x.e_representative != y.e_representative ||
        x.sweep_set != y.sweep_set)
        return false;
    return a.run.out_dir == b.run.out_dir && a.run.command == b.run.command;
}

} // namespace cgo
