#include "uscqed/acceptance.hpp"
#include "uscqed/uscqed.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace uscqed;

namespace {

constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Defaults double as the schema: every accepted key appears here with its type.
json default_config() {
    return json::parse(R"({
  "experiment": "",
  "output": "out",
  "model": {"N": 2, "epsilon": 0.0, "lambda2": 0.8, "mu": 10000.0},
  "grid": {"x_max": 0.0, "points": 0},
  "bound_states": {"levels": 10, "branch": 0},
  "spectrum": {
    "method": "exact",
    "gamma": 0.005,
    "omega_min": 0.5,
    "omega_max": 2.0,
    "omega_points": 3001,
    "temperature": 0.1,
    "probe_site": 1,
    "fock_cutoff": 300,
    "eigenpairs": -1,
    "prominence": 0.001,
    "bo_bound_states": 200
  },
  "ramsey": {
    "n_max": 200,
    "rabi_amplitude": 0.05,
    "tau_max": 2200.0,
    "tau_step": 2.0,
    "window": 30.0,
    "abs_tol": 1e-10,
    "rel_tol": 1e-10
  },
  "circuit": {
    "C_J": 2.21, "E_J": 336.8, "alpha": 0.74, "C": 79.58, "L": 127.3, "C_s": 1.06, "L_s": 1.27,
    "Phi_e": 0.5,
    "charge_cutoff": 7,
    "surfaces": false,
    "x_max": 2.0,
    "x_points": 81,
    "levels": 4,
    "projected_levels": 16,
    "fock_plus": 6
  },
  "oracles": {"mu": [10000.0, 100000.0]},
  "validate": {"criteria": []},
  "sweep": {"key": "", "values": []}
})");
}

std::string type_name(const json& v) {
    if (v.is_boolean()) return "boolean";
    if (v.is_number_integer()) return "integer";
    if (v.is_number()) return "number";
    if (v.is_string()) return "string";
    if (v.is_array()) return "array";
    if (v.is_object()) return "object";
    return "null";
}

void merge_strict(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw ConfigError(path.empty() ? "config root must be an object" : path + ": expected object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw ConfigError("unknown key: " + key);
        json& slot = base[it.key()];
        const json& v = it.value();
        if (slot.is_object()) {
            merge_strict(slot, v, key);
        } else if (slot.is_number_integer()) {
            if (v.is_number_integer()) slot = v;
            else if (v.is_number_float() && std::floor(v.get<double>()) == v.get<double>()) slot = static_cast<long>(v.get<double>());
            else throw ConfigError(key + ": expected integer, got " + type_name(v));
        } else if (slot.is_number()) {
            if (!v.is_number()) throw ConfigError(key + ": expected number, got " + type_name(v));
            slot = v.get<double>();
        } else if (slot.is_boolean() || slot.is_string()) {
            if (type_name(v) != type_name(slot)) throw ConfigError(key + ": expected " + type_name(slot) + ", got " + type_name(v));
            slot = v;
        } else if (slot.is_array()) {
            if (!v.is_array()) throw ConfigError(key + ": expected array, got " + type_name(v));
            for (std::size_t i = 0; i < v.size(); ++i)
                if (!v[i].is_number()) throw ConfigError(key + "[" + std::to_string(i) + "]: expected number");
            slot = v;
        }
    }
}

json load_config(const std::string& path) {
    json cfg = default_config();
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path);
    json user;
    try {
        user = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    merge_strict(cfg, user, "");
    return cfg;
}

json* lookup(json& cfg, const std::string& dotted) {
    json* node = &cfg;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (!node->is_object() || !node->contains(part)) return nullptr;
        node = &(*node)[part];
        if (dot == std::string::npos) return node;
        start = dot + 1;
    }
}

// ---- parameter extraction

ModelParams model_params(const json& cfg) {
    const auto& m = cfg["model"];
    const int N = m["N"].get<int>();
    if (N < 1 || N > 8) throw ConfigError("model.N: must be in [1, 8]");
    if (m["lambda2"].get<double>() < 0) throw ConfigError("model.lambda2: must be >= 0");
    if (m["mu"].get<double>() <= 0) throw ConfigError("model.mu: must be > 0");
    return ModelParams::dimensionless(m["lambda2"].get<double>(), m["mu"].get<double>(), m["epsilon"].get<double>(), N);
}

XGrid grid_for(const json& cfg, const ModelParams& p) {
    XGrid g = XGrid::default_for(p);
    const double xm = cfg["grid"]["x_max"].get<double>();
    const int pts = cfg["grid"]["points"].get<int>();
    if (xm < 0) throw ConfigError("grid.x_max: must be >= 0");
    if (pts != 0 && pts < 3) throw ConfigError("grid.points: must be 0 or >= 3");
    if (xm > 0 || pts > 0) g = XGrid::symmetric(xm > 0 ? xm : g.x_max, pts > 0 ? pts : g.points);
    return g;
}

circuit::CircuitParams circuit_params(const json& cfg) {
    const auto& c = cfg["circuit"];
    circuit::CircuitParams cp;
    cp.C_J = c["C_J"];
    cp.E_J = c["E_J"];
    cp.alpha = c["alpha"];
    cp.C = c["C"];
    cp.L = c["L"];
    cp.C_s = c["C_s"];
    cp.L_s = c["L_s"];
    cp.Phi_e = c["Phi_e"];
    cp.validate();
    return cp;
}

SpectrumConfig spectrum_config(const json& cfg) {
    const auto& s = cfg["spectrum"];
    SpectrumConfig c;
    c.gamma = s["gamma"];
    c.omega_grid = SpectrumConfig::linspace(s["omega_min"], s["omega_max"], s["omega_points"].get<int>());
    c.temperature = s["temperature"];
    c.probe_site = s["probe_site"];
    c.eigenpair_count = s["eigenpairs"];
    c.fock_cutoff = s["fock_cutoff"];
    c.prominence = s["prominence"];
    c.validate();
    return c;
}

// ---- output

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const fs::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        row_strings(header);
    }
    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << num(values[i]);
        out_ << '\n';
    }
    void row_strings(const std::vector<std::string>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

struct RunResult {
    json summary = json::object();
    std::vector<std::string> artifacts;
    bool validation_failed{false};
};

json derived_quantities(const json& cfg) {
    const auto& m = cfg["model"];
    const double l2 = m["lambda2"], mu = m["mu"];
    const int N = m["N"];
    return {{"lambda", std::sqrt(l2)},
            {"lambda2", l2},
            {"mu", mu},
            {"lambda_c", analytics::lambda_c(N)},
            {"omega_r_over_omega_q", 1.0 / std::sqrt(mu)},
            {"triplet_lambda2_crit", N == 2 ? json(analytics::triplet_lambda2_crit(m["epsilon"])) : json(nullptr)}};
}

void write_metadata(const fs::path& dir, const std::string& kind, const json& cfg, const RunResult& r) {
    json meta;
    meta["experiment"] = kind;
    meta["version"] = kVersion;
    meta["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION);
    meta["config"] = cfg;
    meta["derived"] = derived_quantities(cfg);
    meta["summary"] = r.summary;
    meta["artifacts"] = r.artifacts;
    std::ofstream(dir / "metadata.json") << meta.dump(2) << '\n';
}

// ---- experiments

RunResult run_potentials(const json& cfg, const fs::path& dir) {
    auto p = model_params(cfg);
    auto g = grid_for(cfg, p);
    auto S = build_surfaces(g, p);
    std::vector<std::string> header{"X"};
    for (int k = 0; k < S.branch_count(); ++k) {
        std::string label = S.labels[k];
        std::replace(label.begin(), label.end(), ',', ' ');
        header.push_back("V" + std::to_string(k) + "(" + label + ")");
    }
    {
        CsvWriter w(dir / "potentials.csv", header);
        std::vector<double> row(S.branch_count() + 1);
        for (int i = 0; i < g.points; ++i) {
            row[0] = g.x(i);
            for (int k = 0; k < S.branch_count(); ++k) row[k + 1] = S.branches(i, k);
            w.row(row);
        }
    }
    RunResult r;
    r.artifacts.push_back("potentials.csv");
    CsvWriter w(dir / "minima.csv", {"branch", "label", "x_min", "v_min", "curvature_at_zero"});
    json mins = json::array();
    for (int k = 0; k < S.branch_count(); ++k) {
        Eigen::Index imin = 0;
        // search X >= 0 so symmetric pairs report the positive minimum
        const int half = g.points / 2;
        S.branches.col(k).tail(g.points - half).minCoeff(&imin);
        imin += half;
        const double h = g.spacing();
        const int c = half;
        const double curv = (S.branches(c + 1, k) - 2 * S.branches(c, k) + S.branches(c - 1, k)) / (h * h);
        w.row_strings({std::to_string(k), S.labels[k], num(g.x(static_cast<int>(imin))), num(S.branches(imin, k)), num(curv)});
        mins.push_back(g.x(static_cast<int>(imin)));
    }
    r.artifacts.push_back("minima.csv");
    r.summary["x_min_ground"] = mins[0];
    // maximal-spin branches, positive-side global minimum
    const double smax = 0.5 * p.N;
    const int half = g.points / 2;
    for (int k = 0; k < p.N; ++k) {
        RVec V = sector_branch(p, g, smax, k);
        Eigen::Index i = 0;
        V.tail(g.points - half).minCoeff(&i);
        r.summary["x_min_max_spin_k" + std::to_string(k)] = g.x(static_cast<int>(i) + half);
    }
    if (S.branch_count() > 1) r.summary["x_min_first_excited"] = mins[1];
    r.summary["branches"] = S.branch_count();
    return r;
}

RunResult run_bound_states(const json& cfg, const fs::path& dir) {
    auto p = model_params(cfg);
    auto g = grid_for(cfg, p);
    const int levels = cfg["bound_states"]["levels"], branch = cfg["bound_states"]["branch"];
    auto S = build_surfaces(g, p);
    if (branch < 0 || branch >= S.branch_count()) throw ConfigError("bound_states.branch: out of range");
    if (levels < 1) throw ConfigError("bound_states.levels: must be >= 1");
    auto bs = solve_bound_states(S.branch(branch), g, p.mu(), levels, branch);
    RunResult r;
    {
        CsvWriter w(dir / "levels.csv", {"n", "energy"});
        for (Eigen::Index n = 0; n < bs.energies.size(); ++n) w.row({static_cast<double>(n), bs.energies(n)});
    }
    {
        std::vector<std::string> header{"X"};
        for (Eigen::Index n = 0; n < bs.functions.cols(); ++n) header.push_back("phi" + std::to_string(n));
        CsvWriter w(dir / "wavefunctions.csv", header);
        std::vector<double> row(header.size());
        for (int i = 0; i < g.points; ++i) {
            row[0] = g.x(i);
            for (Eigen::Index n = 0; n < bs.functions.cols(); ++n) row[n + 1] = bs.functions(i, n);
            w.row(row);
        }
    }
    r.artifacts = {"levels.csv", "wavefunctions.csv"};
    r.summary["ground_energy"] = bs.energies(0);
    if (bs.energies.size() > 1) r.summary["gap_01"] = bs.energies(1) - bs.energies(0);
    if (g.is_symmetric() && levels >= 2) {
        try {
            r.summary["doublet_splitting"] = doublet_splitting(S.branch(branch), g, p.mu());
        } catch (const std::exception&) {
        }
    }
    return r;
}

void write_spectrum(const fs::path& dir, const SpectrumResult& s, RunResult& r) {
    {
        CsvWriter w(dir / "spectrum.csv", {"omega", "S"});
        for (std::size_t i = 0; i < s.omega.size(); ++i) w.row({s.omega[i], s.values[i]});
    }
    {
        CsvWriter w(dir / "peaks.csv", {"center", "height", "width", "prominence"});
        for (const auto& pk : s.peaks) w.row({pk.center, pk.height, pk.width, pk.prominence});
    }
    {
        CsvWriter w(dir / "transitions.csv", {"frequency", "weight"});
        for (const auto& t : s.transitions) w.row({t.frequency, t.weight});
    }
    r.artifacts = {"spectrum.csv", "peaks.csv", "transitions.csv"};
    r.summary["peaks"] = s.peaks.size();
    r.summary["completeness"] = s.completeness;
    r.summary["thermal_weight"] = s.thermal_weight;
    auto top = acceptance::detail::dominant_peaks(s.peaks, 2);
    for (std::size_t i = 0; i < top.size(); ++i) r.summary["dominant_peak_" + std::to_string(i)] = top[i];
    if (!s.peaks.empty()) r.summary["max_height"] = acceptance::detail::max_height(s.peaks);
}

RunResult run_spectrum(const json& cfg, const fs::path& dir) {
    auto p = model_params(cfg);
    auto c = spectrum_config(cfg);
    const std::string method = cfg["spectrum"]["method"];
    SpectrumResult s;
    if (method == "exact") {
        s = spectrum_ground(p, c);
    } else if (method == "bo") {
        BOSpectrumInput in;
        in.bound_states = cfg["spectrum"]["bo_bound_states"];
        in.grid = grid_for(cfg, p);
        s = spectrum_bo_approx(p, c, in);
    } else {
        throw ConfigError("spectrum.method: expected \"exact\" or \"bo\"");
    }
    RunResult r;
    write_spectrum(dir, s, r);
    auto sc = strong_coupling_condition(p, c.gamma);
    r.summary["strong_coupling_ratio"] = sc.ratio;
    return r;
}

RunResult run_spectrum_thermal(const json& cfg, const fs::path& dir) {
    auto p = model_params(cfg);
    auto c = spectrum_config(cfg);
    if (!(c.temperature > 0)) throw ConfigError("spectrum.temperature: must be > 0 for a thermal spectrum");
    RunResult r;
    write_spectrum(dir, spectrum_thermal(p, c), r);
    return r;
}

RunResult run_ramsey(const json& cfg, const fs::path& dir) {
    auto p = model_params(cfg);
    const auto& rc = cfg["ramsey"];
    PropagatorOptions opt;
    opt.abs_tol = rc["abs_tol"];
    opt.rel_tol = rc["rel_tol"];
    const double tau_max = rc["tau_max"], step = rc["tau_step"];
    if (!(step > 0) || tau_max < 0) throw ConfigError("ramsey.tau_step: must be > 0 with tau_max >= 0");
    auto sys = make_ramsey_system(p, rc["n_max"].get<int>());
    auto cal = calibrate_pi_half(sys, rc["rabi_amplitude"].get<double>(), 0.0, 81, opt);
    const double theta = calibrate_theta(sys, cal.pulse, 0.0, 72, opt);
    std::vector<double> tau;
    for (long i = 0; i * step <= tau_max + 1e-9; ++i) tau.push_back(static_cast<double>(i) * step);
    auto tr = ramsey_scan(sys, cal, tau, theta, true, opt);
    auto f = analyze_trace(tau, tr.p0, rc["window"].get<double>());
    RunResult r;
    {
        CsvWriter w(dir / "ramsey.csv", {"tau_w", "P0", "P0_smoothed"});
        for (std::size_t i = 0; i < tau.size(); ++i) w.row({tau[i], tr.p0[i], f.smoothed[i]});
    }
    r.artifacts = {"ramsey.csv"};
    r.summary["pulse_duration"] = cal.pulse.duration;
    r.summary["drive_frequency"] = cal.pulse.drive_frequency;
    r.summary["fidelity"] = cal.fidelity;
    r.summary["theta"] = theta;
    r.summary["phase_rate"] = tr.phase_rate;
    r.summary["contrast"] = f.contrast;
    r.summary["modulation_frequency"] = f.modulation_frequency;
    r.summary["revival_times"] = f.revival_times;
    r.summary["revival_heights"] = f.revival_heights;
    r.summary["max_norm_drift"] = tr.max_norm_drift;
    return r;
}

RunResult run_circuit(const json& cfg, const fs::path& dir) {
    auto cp = circuit_params(cfg);
    const auto& cc = cfg["circuit"];
    const int K = cc["charge_cutoff"];
    auto nm = circuit::normal_modes(cp);
    auto q = circuit::flux_qubit_spectrum(cp, K, 5);
    const double mu = circuit::effective_mass(cp, K);
    const double l2 = std::pow(nm.g_phi_minus * std::abs(q.phi(0, 1)), 2) / (nm.omega_minus * q.omega_q);
    struct Item {
        const char* key;
        double value, reference;
    };
    const Item items[] = {
        {"omega_q_GHz", q.omega_q, 8.0},
        {"omega_minus_MHz", nm.omega_minus * 1e3, 50.0},
        {"mu", mu, 2.5e4},
        {"g_phi_minus_over_omega_minus", nm.g_phi_minus / nm.omega_minus, 7.15},
        {"g_Q_minus_over_omega_minus", nm.g_Q_minus / nm.omega_minus, 0.06},
        {"omega_plus_GHz", nm.omega_plus, 160.0},
        {"g_Q_plus_over_omega_plus", nm.g_Q_plus / nm.omega_plus, 0.37},
        {"g_phi_plus_over_omega_plus", nm.g_phi_plus / nm.omega_plus, 0.01},
        {"lambda2_single_mode", l2, 0.7},
    };
    json bench = json::object();
    for (const auto& it : items)
        bench[it.key] = {{"value", it.value}, {"reference", it.reference}, {"deviation", it.value / it.reference - 1.0}};
    json out;
    out["benchmarks"] = bench;
    out["normal_modes"] = {{"omega_a_GHz", nm.omega_a},       {"omega_b_GHz", nm.omega_b},
                           {"g_ab_GHz", nm.g_ab},             {"xi", nm.xi},
                           {"Z_ohm", nm.Z},                   {"Z_b_ohm", nm.Z_b},
                           {"limit_g_phi_minus", nm.limit_g_phi_minus}, {"limit_g_Q_minus", nm.limit_g_Q_minus},
                           {"limit_g_phi_plus", nm.limit_g_phi_plus},   {"limit_g_Q_plus", nm.limit_g_Q_plus}};
    out["qubit"] = {{"levels_GHz", std::vector<double>(q.energies.data(), q.energies.data() + q.energies.size())},
                    {"phi01", std::abs(q.phi(0, 1))},
                    {"convergence_shift_GHz", q.convergence_shift},
                    {"alpha_typical", cp.alpha_typical()}};
    RunResult r;
    if (cc["surfaces"].get<bool>()) {
        const int n = cc["x_points"];
        const double xm = cc["x_max"];
        if (n < 2 || !(xm > 0)) throw ConfigError("circuit.x_points: need >= 2 points and x_max > 0");
        std::vector<double> xs;
        for (int i = 0; i < n; ++i) xs.push_back(-xm + 2.0 * xm * i / (n - 1));
        circuit::TwoModeOptions opt;
        opt.M = cc["projected_levels"];
        opt.fock_plus = cc["fock_plus"];
        opt.charge_cutoff = K;
        opt.levels = cc["levels"];
        auto two = circuit::two_mode_bo_surfaces(cp, xs, opt);
        auto ref = circuit::single_mode_reference(cp, two.omega_unit, K);
        auto one = circuit::single_mode_surfaces(ref, xs, opt);
        std::vector<std::string> header{"X"};
        for (int k = 0; k < opt.levels; ++k) header.push_back("two_mode_" + std::to_string(k));
        for (int k = 0; k < opt.levels; ++k) header.push_back("single_mode_" + std::to_string(k));
        CsvWriter w(dir / "surfaces.csv", header);
        for (int i = 0; i < n; ++i) {
            std::vector<double> row{xs[i]};
            for (int k = 0; k < opt.levels; ++k) row.push_back(two.branches(i, k));
            for (int k = 0; k < opt.levels; ++k) row.push_back(one.branches(i, k));
            w.row(row);
        }
        r.artifacts.push_back("surfaces.csv");
        out["surfaces"] = {{"omega_unit_GHz", two.omega_unit}, {"lambda2_two_mode", two.lambda2},
                           {"lambda2_single_mode", one.lambda2}, {"mu", two.mu},
                           {"reference_C_J_fF", ref.C_J},       {"p_term_bound", two.p_term_bound},
                           {"max_deviation", circuit::surface_deviation(two, one, std::min(3, opt.levels), xm)}};
    }
    std::ofstream(dir / "circuit.json") << out.dump(2) << '\n';
    r.artifacts.insert(r.artifacts.begin(), "circuit.json");
    for (const auto& it : items) r.summary[it.key] = it.value;
    return r;
}

RunResult run_oracles(const json& cfg, const fs::path& dir) {
    RunResult r;
    CsvWriter w(dir / "oracles.csv", {"quantity", "parameters", "formula", "numeric", "relative_error"});
    auto add = [&](const std::string& q, const std::string& par, double formula, double numeric) {
        w.row_strings({q, "\"" + par + "\"", num(formula), num(numeric), num(std::abs(numeric / formula - 1.0))});
    };
    // Dicke-model potentials
    for (int N : {1, 2, 3}) {
        auto p = ModelParams::dimensionless(1.5, 1e4, -1.0, N);
        auto g = XGrid::symmetric(6.0, 601);
        auto S = build_surfaces(g, p);
        const int i = 390;
        const double X = g.x(i);
        add("dicke_ground_potential", "N=" + std::to_string(N) + ";lambda2=1.5;X=" + num(X),
            analytics::dm_potential({0.5 * N, -0.5 * N}, X, p.lambda()), S.branches(i, 0));
    }
    // curvature zero crossings
    for (int N : {1, 2, 3, 4}) {
        auto f = [&](double l2) { return curvature_at_zero(ModelParams::dimensionless(l2, 1e4, -1.0, N), 0.5 * N, 0); };
        const double l2c = acceptance::detail::bisect(f, 1e-3, 2.0);
        add("ground_lambda2_crit", "N=" + std::to_string(N) + ";eps=-1", 1.0 / N, l2c);
    }
    for (double eps : {0.0, 0.02, 0.1}) {
        auto f = [&](double l2) { return curvature_at_zero(ModelParams::dimensionless(l2, 1e4, eps, 2), 1.0, 1); };
        add("triplet_lambda2_crit", "N=2;eps=" + num(eps), analytics::triplet_lambda2_crit(eps),
            acceptance::detail::bisect(f, 0.05, 1.5));
    }
    for (const auto& v : cfg["oracles"]["mu"]) {
        const double mu = v.get<double>();
        auto p = ModelParams::dimensionless(1.0, mu, -1.0, 1);
        auto g = XGrid::symmetric(3.0, 6001);
        RVec V = sector_branch(p, g, 0.5, 0);
        add("critical_splitting", "N=1;mu=" + num(mu), analytics::tunnel_splitting_critical(1.0, mu),
            doublet_splitting(V, g, mu));
    }
    for (double l2 : {1.3, 1.5, 1.8}) {
        auto p = ModelParams::dimensionless(l2, 1e4, -1.0, 1);
        auto g = XGrid::default_for(p);
        RVec V = sector_branch(p, g, 0.5, 0);
        add("log_deep_splitting", "N=1;mu=1e4;lambda2=" + num(l2), analytics::log_tunnel_splitting(p.lambda(), 1.0, 1e4),
            std::log(doublet_splitting(V, g, 1e4)));
    }
    r.artifacts = {"oracles.csv"};
    return r;
}

RunResult run_validate(const json& cfg, const fs::path& dir) {
    std::vector<int> ids;
    for (const auto& v : cfg["validate"]["criteria"]) ids.push_back(v.get<int>());
    if (ids.empty())
        for (int i = 1; i <= static_cast<int>(acceptance::all_criteria().size()); ++i) ids.push_back(i);
    RunResult r;
    CsvWriter w(dir / "validation.csv", {"id", "name", "passed", "seconds", "detail"});
    int passed = 0;
    for (int id : ids) {
        if (id < 1 || id > static_cast<int>(acceptance::all_criteria().size()))
            throw ConfigError("validate.criteria: no criterion " + std::to_string(id));
        auto res = acceptance::run_criterion(id);
        std::cout << acceptance::format_line(res) << std::endl;
        std::string detail = res.detail;
        for (char& ch : detail)
            if (ch == '"') ch = '\'';
        w.row_strings({std::to_string(res.id), "\"" + res.name + "\"", res.passed ? "1" : "0", num(res.seconds), "\"" + detail + "\""});
        if (res.passed) ++passed;
        else r.validation_failed = true;
    }
    r.summary["passed"] = passed;
    r.summary["total"] = ids.size();
    r.artifacts = {"validation.csv"};
    return r;
}

using Runner = RunResult (*)(const json&, const fs::path&);

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> m{
        {"potentials", run_potentials}, {"bound-states", run_bound_states}, {"spectrum", run_spectrum},
        {"spectrum-thermal", run_spectrum_thermal}, {"ramsey", run_ramsey}, {"circuit", run_circuit},
        {"oracles", run_oracles}, {"validate", run_validate}};
    return m;
}

std::string normalize_kind(std::string k) {
    for (char& c : k)
        if (c == '_') c = '-';
    return k;
}

RunResult run_one(const std::string& kind, const json& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    RunResult r = runners().at(kind)(cfg, dir);
    write_metadata(dir, kind, cfg, r);
    return r;
}

int run_sweep(json cfg, const fs::path& dir) {
    const std::string kind = normalize_kind(cfg["experiment"]);
    if (kind.empty() || !runners().count(kind) || kind == "validate")
        throw ConfigError("experiment: sweep needs an experiment kind other than validate");
    const std::string key = cfg["sweep"]["key"];
    if (key.empty()) throw ConfigError("sweep.key: exactly one swept key is required");
    if (key.rfind("sweep", 0) == 0 || key == "experiment" || key == "output") throw ConfigError("sweep.key: cannot sweep " + key);
    json* slot = lookup(cfg, key);
    if (!slot || !slot->is_number()) throw ConfigError("sweep.key: " + key + " is not a numeric setting");
    const json values = cfg["sweep"]["values"];
    if (values.empty()) throw ConfigError("sweep.values: empty values list");
    const bool integral = slot->is_number_integer();

    std::vector<json> configs;
    for (const auto& v : values) {
        json c = cfg;
        json* s = lookup(c, key);
        if (integral) {
            if (std::floor(v.get<double>()) != v.get<double>()) throw ConfigError("sweep.values: " + key + " needs integers");
            *s = static_cast<long>(v.get<double>());
        } else {
            *s = v.get<double>();
        }
        configs.push_back(std::move(c));
    }
    fs::create_directories(dir);
    std::vector<RunResult> results(configs.size());
    parallel_for(configs.size(), [&](std::size_t i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", i);
        results[i] = run_one(kind, configs[i], dir / name);
    });

    // aggregate: one row per value, scalar summary entries as columns
    std::vector<std::string> cols;
    for (const auto& r : results)
        for (auto it = r.summary.begin(); it != r.summary.end(); ++it)
            if (it.value().is_number() && std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
    std::vector<std::string> header{"point", key};
    header.insert(header.end(), cols.begin(), cols.end());
    {
        CsvWriter w(dir / "aggregate.csv", header);
        for (std::size_t i = 0; i < results.size(); ++i) {
            std::vector<std::string> row{std::to_string(i), num(values[i].get<double>())};
            for (const auto& c : cols)
                row.push_back(results[i].summary.contains(c) ? num(results[i].summary[c].get<double>()) : "nan");
            w.row_strings(row);
        }
    }
    json meta;
    meta["experiment"] = "sweep";
    meta["version"] = kVersion;
    meta["swept_experiment"] = kind;
    meta["config"] = cfg;
    meta["points"] = json::array();
    for (std::size_t i = 0; i < results.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", i);
        meta["points"].push_back({{"directory", name}, {"value", values[i]}, {"summary", results[i].summary}});
    }
    meta["artifacts"] = {"aggregate.csv"};
    std::ofstream(dir / "metadata.json") << meta.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ultrastrong-coupling circuit QED simulations"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    std::string config_path, out_dir;
    const std::vector<std::string> kinds{"potentials", "bound-states", "spectrum", "spectrum-thermal", "ramsey",
                                         "circuit",    "oracles",      "validate", "sweep"};
    for (const auto& k : kinds) {
        auto* sub = app.add_subcommand(k, "run the " + k + " experiment");
        auto* opt = sub->add_option("config", config_path, "JSON config file");
        if (k == "sweep") opt->required();
        sub->add_option("--out", out_dir, "output directory (overrides config output)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    const std::string kind = app.get_subcommands().front()->get_name();
    try {
        json cfg = load_config(config_path);
        const std::string declared = normalize_kind(cfg["experiment"]);
        if (kind != "sweep") {
            if (!declared.empty() && declared != kind)
                throw ConfigError("experiment: config declares " + declared + " but subcommand is " + kind);
            cfg["experiment"] = kind;
        }
        if (!out_dir.empty()) cfg["output"] = out_dir;
        const fs::path dir = cfg["output"].get<std::string>();
        if (kind == "sweep") return run_sweep(cfg, dir);
        RunResult r = run_one(kind, cfg, dir);
        return r.validation_failed ? 2 : 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
