#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "isingloop/ht_expansion.hpp"
#include "isingloop/oracle.hpp"
#include "isingloop/pt_solver.hpp"
#include "isingloop/sc_series.hpp"
#include "isingloop/walker.hpp"

using namespace isingloop;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
enum Exit { kOk = 0, kMismatch = 2, kPartial = 3, kUsage = 64 };

struct Output {
    std::string out, csv, config;
};

struct Report {
    std::string command;
    json config = json::object();
    json budget = json::object();
    json rows = json::array();
    json checks = json::object();
    json diagnostics = json::object();

    bool checks_pass() const {
        for (const auto& [k, v] : checks.items())
            if (!v.get<bool>()) return false;
        return true;
    }
};

json exact(const mpq_class& q) { return q.get_str(); }
json exact(const mpz_class& z) { return z.get_str(); }

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    }
    if (v.is_array()) {
        std::string s;
        for (const auto& e : v) s += (s.empty() ? "" : ";") + csv_cell(e);
        return s;
    }
    return v.dump();
}

void write_csv(const json& rows, std::ostream& os) {
    std::set<std::string> cols;
    for (const auto& r : rows)
        for (const auto& [k, v] : r.items()) cols.insert(k);
    bool first = true;
    for (const auto& c : cols) os << (first ? "" : ",") << c, first = false;
    os << "\n";
    for (const auto& r : rows) {
        first = true;
        for (const auto& c : cols) {
            os << (first ? "" : ",") << (r.contains(c) ? csv_cell(r[c]) : "");
            first = false;
        }
        os << "\n";
    }
}

int emit(const Report& rep, const Output& o, int code) {
    json j;
    j["tool"] = "isingloop";
    j["version"] = kVersion;
    j["command"] = rep.command;
    j["config"] = rep.config;
    j["budget"] = rep.budget;
    j["rows"] = rep.rows;
    j["checks"] = rep.checks;
    j["diagnostics"] = rep.diagnostics;
    j["exit_code"] = code;
    std::string text = j.dump(2) + "\n";
    if (o.out.empty() || o.out == "-") {
        std::cout << text;
    } else {
        std::ofstream f(o.out, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write " + o.out);
        f << text;
    }
    if (!o.csv.empty()) {
        std::ofstream f(o.csv, std::ios::binary);
        if (!f) throw std::invalid_argument("cannot write " + o.csv);
        write_csv(rep.rows, f);
    }
    return code;
}

std::pair<double, double> parse_window(const std::string& s) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("fit window must be lo:hi");
    double lo = std::stod(s.substr(0, colon)), hi = std::stod(s.substr(colon + 1));
    if (!(lo > 0 && hi > lo)) throw std::invalid_argument("fit window needs 0 < lo < hi");
    return {lo, hi};
}

LatticeKind parse_kind(const std::string& s) {
    if (s == "chain") return LatticeKind::Chain;
    if (s == "sq") return LatticeKind::SQ;
    if (s == "pt") return LatticeKind::PT;
    if (s == "sc") return LatticeKind::SC;
    throw std::invalid_argument("unknown lattice " + s);
}

int lattice_dim(LatticeKind k) { return k == LatticeKind::Chain ? 1 : k == LatticeKind::SC ? 3 : 2; }

void add_common(CLI::App* sub, Output& o) {
    sub->add_option("--out", o.out, "JSON report path (default stdout)");
    sub->add_option("--csv", o.csv, "CSV export of the report rows");
    sub->add_option("--config", o.config, "key=value file; command-line flags override it");
}

// --- pt-solve

struct PtArgs {
    double J = 1;
    std::optional<double> at_x;
    std::string fit_window = "1e-4:1e-2";
    int points = 15;
    std::string integrand = "planar", quadrature = "graded";
    int trapezoid_n = 128;
    bool no_fit = false;
};

int cmd_pt_solve(const PtArgs& a, const Output& o) {
    Report rep;
    rep.command = "pt-solve";
    rep.config = {{"J", a.J},
                  {"at_x", a.at_x ? json(*a.at_x) : json(nullptr)},
                  {"fit_window", a.fit_window},
                  {"points_per_side", a.points},
                  {"integrand", a.integrand},
                  {"quadrature", a.quadrature},
                  {"trapezoid_n", a.trapezoid_n},
                  {"no_fit", a.no_fit}};
    QuadratureOptions quad;
    if (a.integrand == "printed") quad.integrand = WalkMode::Printed;
    else if (a.integrand != "planar") throw std::invalid_argument("integrand must be planar or printed");
    if (a.quadrature == "trapezoid") quad.kind = QuadratureKind::Trapezoid;
    else if (a.quadrature != "graded") throw std::invalid_argument("quadrature must be graded or trapezoid");
    quad.trapezoid_n = a.trapezoid_n;
    rep.budget = {{"threads", 1}};

    auto cp = critical_point();
    const double exact_xc = 2 - std::sqrt(3.0);
    rep.diagnostics["critical_point"] = {{"x_c", cp.x_c},
                                         {"Tc_over_J", cp.Tc_over_J},
                                         {"f_at_xc", cp.f_at_xc},
                                         {"fprime_at_xc", cp.fprime_at_xc},
                                         {"fsecond_at_xc", cp.fsecond_at_xc}};
    rep.checks["x_c_equals_2_minus_sqrt3"] = std::abs(cp.x_c - exact_xc) < 1e-10;
    rep.checks["f_at_x_c_zero"] = std::abs(cp.f_at_xc) < 1e-12;

    if (a.at_x) {
        auto t = free_energy_at_x(*a.at_x, a.J, quad);
        const bool finite = std::isfinite(t.T);
        rep.rows.push_back({{"r", 0},
                            {"source", "at-x"},
                            {"x", t.x},
                            {"T", finite ? json(t.T) : json(nullptr)},
                            {"phi", finite ? json(t.phi) : json(nullptr)},
                            {"value", t.phi_over_T},
                            {"error", t.error},
                            {"flags", finite ? json::array() : json::array({"infinite-temperature"})}});
    } else if (!a.no_fit) {
        ScanOptions scan;
        std::tie(scan.window_lo, scan.window_hi) = parse_window(a.fit_window);
        scan.points_per_side = a.points;
        scan.quad = quad;
        auto grid = specific_heat_grid(scan);
        auto fit = specific_heat_scan(grid, scan);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const auto& p = grid[i];
            rep.rows.push_back({{"r", i},
                                {"source", "cv-scan"},
                                {"x", p.x},
                                {"T", p.T},
                                {"phi", p.phi},
                                {"value", p.cv},
                                {"error", p.error},
                                {"log_abs_dx", std::log(std::abs(p.x - cp.x_c))},
                                {"side", p.side},
                                {"flags", json::array()}});
        }
        rep.diagnostics["fit"] = {{"B", fit.B},           {"intercept", fit.intercept},
                                  {"r2", fit.r2},         {"B_below", fit.B_below},
                                  {"r2_below", fit.r2_below}, {"B_above", fit.B_above},
                                  {"r2_above", fit.r2_above}, {"window_lo", fit.window_lo},
                                  {"window_hi", fit.window_hi}};
        rep.checks["cv_log_fit_r2_above_0.99"] = fit.r2 > 0.99;
    }
    return emit(rep, o, rep.checks_pass() ? kOk : kMismatch);
}

// --- sc-series

struct ScArgs {
    int order = 8;
    ScSeriesOptions opt;
    bool check_det = false;
};

json series_rows(const SeriesReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows) {
        json flags = json::array();
        if (r.anomaly) flags.push_back("anomaly");
        if (!r.filter_rational) flags.push_back("irrational");
        if (rep.naive) flags.push_back("naive");
        if (r.oracle && !r.agree) flags.push_back("disagree");
        rows.push_back({{"r", r.r},
                        {"source", rep.source},
                        {"value", exact(r.filter)},
                        {"oracle", r.oracle ? exact(*r.oracle) : json(nullptr)},
                        {"agree", r.oracle ? json(r.agree) : json(nullptr)},
                        {"flags", flags}});
    }
    return rows;
}

json report_meta(const SeriesReport& rep) {
    return {{"order", rep.order},
            {"oracle_window", rep.window},
            {"normalization", rep.normalization},
            {"naive", rep.naive},
            {"groups_kept", rep.groups_kept},
            {"groups_dropped", rep.groups_dropped},
            {"all_agree", rep.all_agree()}};
}

int cmd_sc_series(ScArgs a, const Output& o) {
    Report rep;
    rep.command = "sc-series";
    rep.config = {{"order", a.order},
                  {"max_order", a.opt.max_order},
                  {"oracle_order", a.opt.oracle_order},
                  {"projected_prune", a.opt.projected_prune},
                  {"naive", a.opt.naive},
                  {"check_det", a.check_det}};
    rep.budget = {{"term_budget", a.opt.term_budget}, {"threads", 1}};

    if (a.check_det) {
        auto sym = symbolic_psi_sc();
        rep.checks["det_matches_printed"] = sym.psi == printed_psi_sc().psi;
        rep.checks["naive_matches_printed"] = naive_reduce(sym).psi == printed_naive_sc().psi;
        rep.checks["sqrt_order2_matches_printed"] = expand_sqrt(sym, 2, a.opt) == printed_sqrt_fixture();
    }
    if (a.opt.naive) {
        auto z = zero_angle_coefficients(naive_reduce(symbolic_psi_sc()));
        double root = zero_angle_root(z);
        json coeffs = json::array();
        for (const auto& c : z) coeffs.push_back(exact(c));
        rep.diagnostics["zero_angle"] = {{"coefficients", coeffs}, {"root", root}};
        rep.checks["naive_root_equals_2_minus_sqrt3"] = std::abs(root - (2 - std::sqrt(3.0))) < 1e-12;
    }

    int code = kOk;
    ScSeriesRun run;
    try {
        run = run_sc_series(a.order, a.opt);
    } catch (const BudgetExceeded& e) {
        int reached = e.reached_order;
        for (bool done = false; reached >= 0 && !done;) {
            try {
                run = run_sc_series(reached, a.opt);
                done = true;
            } catch (const BudgetExceeded& again) {
                reached = std::min(reached - 1, again.reached_order);
            }
        }
        rep.diagnostics["budget_exceeded"] = {{"requested_order", a.order}, {"reached_order", reached}};
        if (reached < 0) return emit(rep, o, kPartial);
        code = kPartial;
    }
    for (const auto* r : {&run.sqrt_report, &run.log_report}) {
        for (auto& row : series_rows(*r)) rep.rows.push_back(row);
        rep.diagnostics[r->source] = report_meta(*r);
    }
    bool odd_zero = true;
    for (const auto* r : {&run.sqrt_report, &run.log_report})
        for (const auto& row : r->rows)
            if (row.r % 2 == 1 && row.filter != 0) odd_zero = false;
    rep.checks["odd_orders_zero"] = odd_zero;
    if (code == kOk && !(run.sqrt_report.all_agree() && run.log_report.all_agree() && rep.checks_pass()))
        code = kMismatch;
    return emit(rep, o, code);
}

// --- ht-expand

struct HtArgs {
    std::string lattice = "sq";
    int order = 8, radius = -1;
    bool unrestricted = false, no_dedup = false, compare = false, stability = false;
    std::size_t term_budget = 20'000'000;
};

int cmd_ht_expand(const HtArgs& a, const Output& o) {
    Report rep;
    rep.command = "ht-expand";
    const LatticeKind kind = parse_kind(a.lattice);
    const int radius = a.radius < 0 ? default_window_radius(a.order) : a.radius;
    rep.config = {{"lattice", a.lattice},
                  {"order", a.order},
                  {"radius", radius},
                  {"through_center", !a.unrestricted},
                  {"bond_dedup", !a.no_dedup},
                  {"compare", a.compare},
                  {"stability", a.stability}};
    rep.budget = {{"term_budget", a.term_budget}, {"threads", 1}};
    if (a.order < 0) throw std::invalid_argument("order must be >= 0");

    auto window = WindowLattice::make(kind, radius);
    auto terms = build_product_terms(window, !a.no_dedup);
    ExpandOptions ex;
    ex.require_center = !a.unrestricted;
    ex.center = window.center();
    ex.prune_odd = true;
    ex.term_budget = a.term_budget;
    auto g = sum_over_configurations(expand_and_reduce(terms.factors, a.order, ex), a.order);
    rep.diagnostics["window"] = {{"sites", window.sites()},
                                 {"factors", terms.factors.size()},
                                 {"clipped", terms.clipped},
                                 {"merged", terms.merged},
                                 {"raw_per_family", terms.raw_per_family}};

    std::optional<EvenCounts> oc;
    if (a.compare) {
        int c = 0;
        auto lat = window.as_lattice(c);
        CountOptions co;
        if (!a.unrestricted) co.through = c;
        oc = count_even_subgraphs(lat, a.order, co);
        rep.diagnostics["oracle_complete"] = oc->complete;
    }
    std::optional<std::vector<mpz_class>> bigger;
    if (a.stability) {
        auto w2 = WindowLattice::make(kind, radius + 1);
        ExpandOptions ex2 = ex;
        ex2.center = w2.center();
        bigger = sum_over_configurations(expand_and_reduce(build_product_terms(w2, !a.no_dedup).factors, a.order, ex2),
                                         a.order);
    }

    bool agree = true, stable = true;
    json series = json::array();
    for (int r = 0; r <= a.order; ++r) {
        json row = {{"r", r}, {"source", "window"}, {"value", exact(g[r])}, {"flags", json::array()}};
        // the empty graph has no spin and is dropped by the through-center step; S restores it
        series.push_back(r == 0 && !a.unrestricted ? json("1") : exact(g[r]));
        if (oc) {
            row["oracle"] = exact(oc->total[r]);
            row["agree"] = oc->total[r] == g[r];
            agree = agree && oc->total[r] == g[r];
            if (oc->total[r] != g[r]) row["flags"].push_back("disagree");
        }
        if (bigger) {
            row["next_window"] = exact((*bigger)[r]);
            row["stable"] = (*bigger)[r] == g[r];
            stable = stable && (*bigger)[r] == g[r];
            if ((*bigger)[r] != g[r]) row["flags"].push_back("unstable");
        }
        rep.rows.push_back(row);
    }
    rep.diagnostics["S"] = series;
    if (oc) rep.checks["window_matches_oracle"] = agree;
    if (bigger) rep.checks["stable_under_window_growth"] = stable;
    int code = rep.checks_pass() ? kOk : kMismatch;
    if (oc && !oc->complete) code = kPartial;
    return emit(rep, o, code);
}

// --- oracle

struct OracleArgs {
    std::string lattice = "sq", sides;
    int L = 4, order = 8;
    bool open = false, exhaustive = false, per_site = false;
    std::optional<int> through;
    std::uint64_t node_budget = 4'000'000'000;
};

int cmd_oracle(const OracleArgs& a, const Output& o) {
    Report rep;
    rep.command = "oracle";
    const LatticeKind kind = parse_kind(a.lattice);
    std::vector<int> sides(lattice_dim(kind), a.L);
    if (!a.sides.empty()) {
        sides.clear();
        std::stringstream ss(a.sides);
        for (std::string t; std::getline(ss, t, ',');) sides.push_back(std::stoi(t));
    }
    rep.config = {{"lattice", a.lattice},
                  {"sides", sides},
                  {"periodic", !a.open},
                  {"order", a.order},
                  {"exhaustive", a.exhaustive},
                  {"per_site", a.per_site},
                  {"through", a.through ? json(*a.through) : json(nullptr)}};
    rep.budget = {{"node_budget", a.node_budget}, {"threads", 1}};
    if (a.order < 0) throw std::invalid_argument("order must be >= 0");

    auto lat = LatticeSpec::make(kind, sides, !a.open);
    CountOptions co;
    co.through = a.through;
    co.node_budget = a.node_budget;
    auto c = count_even_subgraphs(lat, a.order, co);
    for (int r = 0; r <= a.order; ++r)
        rep.rows.push_back({{"r", r},
                            {"source", "even-subgraphs"},
                            {"value", exact(c.total[r])},
                            {"connected", exact(c.connected[r])},
                            {"flags", r > c.reached ? json::array({"partial"}) : json::array()}});
    rep.diagnostics["sites"] = lat.sites();
    rep.diagnostics["bonds"] = lat.bonds.size();
    rep.diagnostics["complete"] = c.complete;
    rep.diagnostics["reached"] = c.reached;

    if (a.exhaustive) {
        if (a.through) throw std::invalid_argument("--exhaustive counts the whole lattice; drop --through");
        auto ex = exhaustive_partition(lat);
        auto fp = full_partition_polynomial(lat);
        for (std::size_t r = 0; r < ex.size(); ++r)
            rep.rows.push_back({{"r", r}, {"source", "exhaustive"}, {"value", exact(ex[r])}, {"flags", json::array()}});
        for (std::size_t r = 0; r < fp.size(); ++r)
            rep.rows.push_back({{"r", r}, {"source", "full-partition"}, {"value", exact(fp[r])}, {"flags", json::array()}});
        rep.checks["exhaustive_equals_full_partition"] = ex == fp;
        bool same = true;
        for (int r = 0; r <= std::min(a.order, c.reached); ++r)
            same = same && (r < int(ex.size()) ? ex[r] : mpz_class(0)) == c.total[r];
        rep.checks["exhaustive_equals_even_subgraphs"] = same;
    }
    if (a.per_site) {
        auto ps = per_site_connected(kind, a.order);
        auto ls = per_site_log_series(kind, a.order);
        bool same = true;
        for (int r = 0; r <= a.order; ++r) {
            same = same && mpq_class(ps.rooted_min[r]) == ps.weighted[r];
            rep.rows.push_back({{"r", r},
                                {"source", "per-site-connected"},
                                {"value", exact(ps.rooted_min[r])},
                                {"weighted", exact(ps.weighted[r])},
                                {"flags", json::array()}});
            rep.rows.push_back({{"r", r}, {"source", "per-site-log"}, {"value", exact(ls[r])}, {"flags", json::array()}});
        }
        rep.checks["per_site_methods_agree"] = same;
    }
    int code = rep.checks_pass() ? kOk : kMismatch;
    if (!c.complete) code = kPartial;
    return emit(rep, o, code);
}

// --- loops

struct LoopArgs {
    bool examples = false;
    int whitney_length = 10;
    std::string mode = "planar", dedup = "none";
    std::uint64_t node_budget = 100'000'000;
};

int cmd_loops(const LoopArgs& a, const Output& o) {
    Report rep;
    rep.command = "loops";
    rep.config = {{"examples", a.examples},
                  {"whitney_length", a.whitney_length},
                  {"mode", a.mode},
                  {"dedup", a.dedup}};
    rep.budget = {{"node_budget", a.node_budget}, {"threads", 1}};

    if (a.whitney_length > 0) {
        EnumerateOptions eo;
        eo.node_budget = a.node_budget;
        if (a.dedup == "reversal") eo.dedup = Dedup::Reversal;
        else if (a.dedup == "cyclic") eo.dedup = Dedup::CyclicShift;
        else if (a.dedup != "none") throw std::invalid_argument("dedup must be none, reversal or cyclic");
        WalkMode mode = WalkMode::Planar;
        if (a.mode == "printed") mode = WalkMode::Printed;
        else if (a.mode != "planar") throw std::invalid_argument("mode must be planar or printed");
        auto loops = enumerate_loops({mode, 0}, a.whitney_length, eo);
        std::vector<long> total(a.whitney_length + 1, 0), pass(a.whitney_length + 1, 0);
        for (const auto& w : loops) {
            ++total[w.dirs.size()];
            pass[w.dirs.size()] += whitney_check(w);
        }
        long fails = 0;
        for (int r = 1; r <= a.whitney_length; ++r) {
            fails += total[r] - pass[r];
            rep.rows.push_back({{"r", r},
                                {"source", "whitney"},
                                {"value", total[r]},
                                {"passed", pass[r]},
                                {"flags", total[r] == pass[r] ? json::array() : json::array({"failures"})}});
        }
        rep.diagnostics["whitney"] = {{"loops", loops.size()}, {"failures", fails}};
        rep.checks["whitney_all_pass"] = fails == 0;
    }
    if (a.examples) {
        const int printed[3] = {1, 0, 0};
        std::string summary;
        json detail = json::array();
        bool match = true;
        for (int which = 1; which <= 3; ++which) {
            auto s = graph_loop_sum(LoopGraph::from_steps(WalkMode::TaggedSC, example_steps(which)));
            CycloNum v = filter_graph_sum(s.total);
            json terms = json::array();
            for (const auto& t : s.terms)
                terms.push_back({{"loops", t.loops},
                                 {"sign", t.sign},
                                 {"phase_exponent", t.phase_exponent},
                                 {"tag", t.tag.str()},
                                 {"factor", t.factor().str()}});
            detail.push_back({{"example", which}, {"terms", terms}, {"total", s.total.str()}});
            bool ok = v == CycloNum(printed[which - 1]);
            match = match && ok;
            std::string val = v.is_rational() && v[0] > 0 ? "+" + v[0].get_str() : v.str();
            summary += (summary.empty() ? "" : ", ") + ("Example" + std::to_string(which) + ":" + val);
            rep.rows.push_back({{"r", which}, {"source", "example"}, {"value", val}, {"flags", json::array()}});
        }
        rep.diagnostics["examples"] = detail;
        rep.diagnostics["examples_summary"] = summary;
        rep.checks["examples_match_printed"] = match;
    }
    return emit(rep, o, rep.checks_pass() ? kOk : kMismatch);
}

// Prepend key=value entries of --config FILE so later command-line flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        std::string path;
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
        else continue;
        CLI::ConfigINI ini;
        std::vector<std::string> extra;
        for (const auto& item : ini.from_file(path)) {
            if (item.name == "++" || item.name == "--") continue;
            std::string v;
            for (const auto& s : item.inputs) v += (v.empty() ? "" : " ") + s;
            extra.push_back("--" + item.name + "=" + v);
        }
        args.insert(args.begin() + 1, extra.begin(), extra.end());
        break;
    }
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Loop-counting and series tools for the Ising model"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Output out;
    PtArgs pt;
    ScArgs sc;
    HtArgs ht;
    OracleArgs orc;
    LoopArgs lp;

    auto* c_pt = app.add_subcommand("pt-solve", "critical point, free energy and specific-heat fit");
    add_common(c_pt, out);
    c_pt->add_option("--J", pt.J, "coupling");
    c_pt->add_option("--at-x", pt.at_x, "free energy at this x instead of the scan");
    c_pt->add_option("--fit-window", pt.fit_window, "|x - x_c| range lo:hi");
    c_pt->add_option("--points", pt.points, "scan points per side")->check(CLI::PositiveNumber);
    c_pt->add_option("--integrand", pt.integrand, "planar or printed");
    c_pt->add_option("--quadrature", pt.quadrature, "graded or trapezoid");
    c_pt->add_option("--trapezoid-n", pt.trapezoid_n)->check(CLI::PositiveNumber);
    c_pt->add_flag("--no-fit", pt.no_fit, "critical point only");

    auto* c_sc = app.add_subcommand("sc-series", "cubic-lattice determinant, filtered series and oracle comparison");
    add_common(c_sc, out);
    c_sc->add_option("--order", sc.order)->check(CLI::NonNegativeNumber);
    c_sc->add_option("--max-order", sc.opt.max_order);
    c_sc->add_option("--oracle-order", sc.opt.oracle_order)->check(CLI::NonNegativeNumber);
    c_sc->add_option("--term-budget", sc.opt.term_budget);
    c_sc->add_flag("--prune", sc.opt.projected_prune, "drop terms that cannot reach zero Fourier exponent");
    c_sc->add_flag("--naive", sc.opt.naive, "set all tags to 1");
    c_sc->add_flag("--check-det", sc.check_det, "compare determinants with the printed fixtures");

    auto* c_ht = app.add_subcommand("ht-expand", "window product expansion");
    add_common(c_ht, out);
    c_ht->add_option("--lattice", ht.lattice, "sq or sc");
    c_ht->add_option("--order", ht.order);
    c_ht->add_option("--radius", ht.radius, "window radius (default from order)");
    c_ht->add_flag("--unrestricted", ht.unrestricted, "keep terms without the center spin");
    c_ht->add_flag("--no-dedup", ht.no_dedup, "keep both directed factors of every bond");
    c_ht->add_flag("--compare", ht.compare, "compare with the oracle on the same window");
    c_ht->add_flag("--stability", ht.stability, "compare with the next larger window");
    c_ht->add_option("--term-budget", ht.term_budget);

    auto* c_or = app.add_subcommand("oracle", "brute-force and even-subgraph counts");
    add_common(c_or, out);
    c_or->add_option("--lattice", orc.lattice, "chain, sq, pt or sc");
    c_or->add_option("--L", orc.L, "side length in every direction")->check(CLI::PositiveNumber);
    c_or->add_option("--sides", orc.sides, "comma-separated side lengths");
    c_or->add_flag("--open", orc.open, "open boundaries");
    c_or->add_option("--order", orc.order);
    c_or->add_flag("--exhaustive", orc.exhaustive, "also sum over all spin configurations");
    c_or->add_flag("--per-site", orc.per_site, "per-site counts of the infinite lattice");
    c_or->add_option("--through", orc.through, "only graphs through this site");
    c_or->add_option("--node-budget", orc.node_budget);

    auto* c_lp = app.add_subcommand("loops", "loop enumeration, parity checks and worked graphs");
    add_common(c_lp, out);
    c_lp->add_flag("--examples", lp.examples, "worked graphs 1-3");
    c_lp->add_option("--whitney-length", lp.whitney_length, "longest loop checked (0 to skip)");
    c_lp->add_option("--mode", lp.mode, "planar or printed");
    c_lp->add_option("--dedup", lp.dedup, "none, reversal or cyclic");
    c_lp->add_option("--node-budget", lp.node_budget);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = expand_config(std::move(args));
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*c_pt) return cmd_pt_solve(pt, out);
        if (*c_sc) return cmd_sc_series(sc, out);
        if (*c_ht) return cmd_ht_expand(ht, out);
        if (*c_or) return cmd_oracle(orc, out);
        if (*c_lp) return cmd_loops(lp, out);
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget: " << e.what() << " (reached order " << e.reached_order << ")\n";
        return kPartial;
    } catch (const ResourceLimit& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return kPartial;
    } catch (const LatticeTooLarge& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return kPartial;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kUsage;
}
