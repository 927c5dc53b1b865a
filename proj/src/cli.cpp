#include "chipfire/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "chipfire/family.hpp"
#include "chipfire/rank.hpp"
#include "chipfire/rng.hpp"

namespace chipfire::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw chipfire::ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string fmt_fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// Exact rational, with an opt-in lossy decimal rendering marked by "~".
std::string fq(const Rational& r, int decimal) {
  std::string s = r.str();
  if (decimal > 0) s += "(~" + fmt_fixed(r.to_double(), decimal) + ")";
  return s;
}

void print_named_values(std::ostream& out, const Graph& g, const VecQ& vals,
                        int decimal) {
  for (int v = 0; v < g.order(); ++v)
    out << g.name(v) << " " << fq(vals(v), decimal) << "\n";
}

void print_divisor(std::ostream& out, const Divisor& d, int decimal) {
  print_named_values(out, d.graph(), d.values(), decimal);
}

int resolve_base(const Graph& g, const std::string& base_name) {
  return base_name.empty() ? -1 : g.index(base_name);
}

Family make_family(const std::string& preset, const std::vector<std::string>& params) {
  std::map<std::string, std::string> kv;
  for (const std::string& s : params) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("--param expects key=value, got '" + s + "'");
    kv[s.substr(0, eq)] = s.substr(eq + 1);
  }
  auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  Family fam = [&]() {
    if (preset == "ray-double-exp") return Family::ray_double_exp();
    if (preset == "ray-geometric") {
      auto ratio = take("ratio");
      if (!ratio)
        throw ValidationError("ray-geometric needs --param ratio=p/q");
      return Family::ray_geometric(Rational::parse(*ratio));
    }
    if (preset == "tree-double-exp") return Family::tree_double_exp();
    if (preset == "lollipop") {
      auto core = take("core");
      if (!core) throw ValidationError("lollipop needs --param core=<graph file>");
      Rational scale(1);
      if (auto s = take("scale")) scale = Rational::parse(*s);
      std::string attach;
      if (auto a = take("attach")) attach = *a;
      return Family::lollipop(Graph::parse(read_file(*core)), scale, attach);
    }
    throw ValidationError("unknown preset '" + preset +
                          "' (known: ray-double-exp, ray-geometric, tree-double-exp, "
                          "lollipop)");
  }();
  if (!kv.empty())
    throw ValidationError("unknown parameter '" + kv.begin()->first + "' for preset " +
                          preset);
  return fam;
}

SupportDivisor support_from_file(const Family& fam, int l, const std::string& text,
                                 bool raw) {
  if (l < 1) throw ValidationError("--support-radius must be at least 1");
  const Ball ball = build_ball(fam, l);
  const Divisor d = Divisor::parse(ball.graph, text, raw);
  SupportDivisor sup;
  for (int v = 0; v < ball.graph.order(); ++v)
    if (d.ell(v) != 0) sup.emplace_back(ball.graph.name(v), d.ell(v));
  return sup;
}

// Shared CSV schema: n,rho_n,lambda_n,e_n,ratio43,r_n with exact p/q cells,
// floats at 12 significant digits, blanks where a column was not computed.
// --decimal appends lossy decimal columns for the rational fields.
void write_series_csv(std::ostream& os, const ExhaustionSeries& es,
                      const std::map<int, Rational>& ranks, int decimal) {
  os << "n,rho_n,lambda_n,e_n,ratio43,r_n";
  if (decimal > 0) os << ",rho_n_dec,e_n_dec,ratio43_dec,r_n_dec";
  os << "\n";
  for (const SeriesRow& row : es.rows) {
    const auto rit = ranks.find(row.n);
    os << row.n << "," << row.rho.str_frac() << ","
       << (row.lambda ? fmt_g(*row.lambda) : "") << "," << row.e.str_frac() << ","
       << row.ratio43.str_frac() << ","
       << (rit != ranks.end() ? rit->second.str_frac() : "");
    if (decimal > 0) {
      os << "," << fmt_fixed(row.rho.to_double(), decimal) << ","
         << fmt_fixed(row.e.to_double(), decimal) << ","
         << fmt_fixed(row.ratio43.to_double(), decimal) << ","
         << (rit != ranks.end() ? fmt_fixed(rit->second.to_double(), decimal) : "");
    }
    os << "\n";
  }
}

void write_csv_file(const std::string& path, const ExhaustionSeries& es,
                    const std::map<int, Rational>& ranks, int decimal) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write '" + path + "'");
  write_series_csv(f, es, ranks, decimal);
}

void print_series_table(std::ostream& out, const ExhaustionSeries& es,
                        const std::map<int, Rational>& ranks, int decimal) {
  out << "n rho_n lambda_n e_n ratio43 r_n\n";
  for (const SeriesRow& row : es.rows) {
    const auto rit = ranks.find(row.n);
    out << row.n << " " << fq(row.rho, decimal) << " "
        << (row.lambda ? fmt_g(*row.lambda) : "-") << " " << fq(row.e, decimal) << " "
        << fq(row.ratio43, decimal) << " "
        << (rit != ranks.end() ? fq(rit->second, decimal) : "-") << "\n";
  }
}

struct ProbeConfig {
  std::vector<int> subset;
  VecQ f;
};

// Seeded random subset (crossing: arbitrary nonempty proper set; escape:
// a metric ball) and integer test function with entries in [-3, 3].
ProbeConfig random_probe_config(const Graph& g, SplitMix64& rng, bool ball) {
  ProbeConfig cfg;
  const int n = g.order();
  if (ball) {
    const int radius = static_cast<int>(rng.below(
        static_cast<std::uint64_t>(std::max(1, g.metric().diameter))));
    for (int v = 0; v < n; ++v)
      if (g.metric().dist(v) <= radius) cfg.subset.push_back(v);
  } else {
    for (;;) {
      cfg.subset.clear();
      for (int v = 0; v < n; ++v)
        if (rng.below(2) == 0) cfg.subset.push_back(v);
      if (!cfg.subset.empty() && static_cast<int>(cfg.subset.size()) < n) break;
    }
  }
  cfg.f = VecQ::Constant(n, Rational(0));
  for (int v = 0; v < n; ++v)
    cfg.f(v) = Rational(static_cast<long>(rng.below(7)) - 3);
  return cfg;
}

std::string subset_names(const Graph& g, const std::vector<int>& subset) {
  std::string s = "{";
  for (size_t i = 0; i < subset.size(); ++i) {
    if (i) s += ",";
    s += g.name(subset[i]);
  }
  return s + "}";
}

struct CommonArgs {
  std::string graph_path;
  std::string divisor_path;
  std::string base;
  bool raw = false;
  long long budget = kDefaultBudget;
  int decimal = 0;
};

Graph load_graph(const CommonArgs& a) { return Graph::parse(read_file(a.graph_path)); }

Divisor load_divisor(const Graph& g, const CommonArgs& a) {
  return Divisor::parse(g, read_file(a.divisor_path), a.raw);
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err) {
  (void)in;
  CLI::App app{"exact chip-firing, divisor ranks and spectral series on "
               "rational-weighted graphs"};
  app.name("chipfire");
  app.require_subcommand(1);

  CommonArgs info_a;
  CLI::App* info = app.add_subcommand("info", "graph invariants: masses, quanta, "
                                              "canonical divisor, euler invariant");
  info->add_option("graph", info_a.graph_path, "graph file")->required();
  info->add_option("--decimal", info_a.decimal, "append lossy decimals with this many digits");

  CommonArgs red_a;
  bool red_randomized = false;
  std::uint64_t red_seed = 0;
  CLI::App* reduce = app.add_subcommand("reduce", "base-reduced representative of a "
                                                  "divisor class with its firing function");
  reduce->add_option("graph", red_a.graph_path, "graph file")->required();
  reduce->add_option("divisor", red_a.divisor_path, "divisor file")->required();
  reduce->add_option("--base", red_a.base, "reduce toward this vertex (default: graph base)");
  reduce->add_flag("--raw", red_a.raw, "divisor file holds rational values, not multipliers");
  reduce->add_flag("--randomized", red_randomized, "scrambled schedule (same reduced form)");
  reduce->add_option("--seed", red_seed, "seed for --randomized");
  reduce->add_option("--decimal", red_a.decimal, "append lossy decimals");

  CommonArgs win_a;
  std::string win_mode = "reduced";
  int win_bound = 6;
  CLI::App* winnable = app.add_subcommand("winnable", "does the divisor class contain "
                                                      "an effective divisor?");
  winnable->add_option("graph", win_a.graph_path, "graph file")->required();
  winnable->add_option("divisor", win_a.divisor_path, "divisor file")->required();
  winnable->add_option("--base", win_a.base, "base vertex for the reduction");
  winnable->add_flag("--raw", win_a.raw, "divisor file holds rational values");
  winnable->add_option("--mode", win_mode, "reduced|brute")
      ->check(CLI::IsMember({"reduced", "brute"}));
  winnable->add_option("--bound", win_bound, "firing-function bound for brute mode");

  CommonArgs rank_a;
  bool rank_greedy_flag = false;
  CLI::App* rankc = app.add_subcommand("rank", "divisor rank with minimal obstruction");
  rankc->add_option("graph", rank_a.graph_path, "graph file")->required();
  rankc->add_option("divisor", rank_a.divisor_path, "divisor file")->required();
  rankc->add_option("--base", rank_a.base, "base vertex for winnability tests");
  rankc->add_flag("--raw", rank_a.raw, "divisor file holds rational values");
  rankc->add_option("--budget", rank_a.budget, "enumeration node budget");
  rankc->add_flag("--greedy", rank_greedy_flag,
                  "also run the greedy heuristic and report disagreement");
  rankc->add_option("--decimal", rank_a.decimal, "append lossy decimals");

  CommonArgs rr_a;
  CLI::App* rrc = app.add_subcommand("rr-check", "exact identity r(D) - r(K-D) = "
                                                 "deg(D) + e");
  rrc->add_option("graph", rr_a.graph_path, "graph file")->required();
  rrc->add_option("divisor", rr_a.divisor_path, "divisor file")->required();
  rrc->add_option("--base", rr_a.base, "base vertex for winnability tests");
  rrc->add_flag("--raw", rr_a.raw, "divisor file holds rational values");
  rrc->add_option("--budget", rr_a.budget, "enumeration node budget");
  rrc->add_option("--decimal", rr_a.decimal, "append lossy decimals");

  CommonArgs ord_a;
  CLI::App* ordersc = app.add_subcommand("orders-rank", "factorial cross-check of the "
                                                        "rank over all vertex orders");
  ordersc->add_option("graph", ord_a.graph_path, "graph file")->required();
  ordersc->add_option("divisor", ord_a.divisor_path, "divisor file")->required();
  ordersc->add_flag("--raw", ord_a.raw, "divisor file holds rational values");
  ordersc->add_option("--budget", ord_a.budget, "enumeration node budget");
  ordersc->add_option("--decimal", ord_a.decimal, "append lossy decimals");

  std::string spec_graph, spec_probe, spec_preset;
  std::vector<std::string> spec_params;
  std::uint64_t spec_seed = 0;
  int spec_count = 5, spec_n = 1, spec_to = 6, spec_decimal = 0;
  std::string spec_eps = "1";
  CLI::App* spectralc =
      app.add_subcommand("spectral", "eigenvalues and gap of L = (1/m) Delta, "
                                     "or seeded inequality probes");
  spectralc->add_option("graph", spec_graph, "graph file (not used by --probe extension)");
  spectralc->add_option("--probe", spec_probe, "crossing|escape|extension")
      ->check(CLI::IsMember({"crossing", "escape", "extension"}));
  spectralc->add_option("--seed", spec_seed, "probe seed");
  spectralc->add_option("--count", spec_count, "number of probes");
  spectralc->add_option("--eps", spec_eps, "epsilon for the crossing estimate (p/q)");
  spectralc->add_option("--preset", spec_preset, "family preset for --probe extension");
  spectralc->add_option("--param", spec_params, "preset parameter key=value (repeatable)");
  spectralc->add_option("--n", spec_n, "inner radius for --probe extension");
  spectralc->add_option("--to", spec_to, "outer radius for --probe extension");
  spectralc->add_option("--decimal", spec_decimal, "append lossy decimals");

  CLI::App* threshold = app.add_subcommand("threshold-A", "Poincare threshold constant "
                                                          "A and its maximizer");
  (void)threshold;

  std::string fam_preset;
  std::vector<std::string> fam_params;
  CLI::App* family = app.add_subcommand("family", "infinite-family ball exhaustions");
  family->add_option("preset", fam_preset,
                     "ray-double-exp | ray-geometric | tree-double-exp | lollipop")
      ->required();
  family->add_option("--param", fam_params, "preset parameter key=value (repeatable)");
  family->require_subcommand(1);

  int ser_to = 0, ser_jobs = 1, ser_decimal = 0;
  bool ser_gaps = false;
  std::string ser_csv;
  CLI::App* series = family->add_subcommand("series", "rho_n, e_n, ratio43 (and "
                                                      "lambda_n with --gaps) for n = 1..N");
  series->add_option("--to", ser_to, "largest radius N")->required();
  series->add_flag("--gaps", ser_gaps, "also compute spectral gaps (floating point)");
  series->add_option("--jobs", ser_jobs, "parallel radii");
  series->add_option("--csv", ser_csv, "write the CSV table to this path");
  series->add_option("--decimal", ser_decimal, "append lossy decimals");

  std::string conv_divisor, conv_csv;
  int conv_l = 0, conv_to = 0, conv_jobs = 1, conv_stable = 2, conv_decimal = 0;
  long long conv_budget = kDefaultBudget;
  bool conv_raw = false, conv_gaps = false;
  CLI::App* converge = family->add_subcommand("converge", "rank series r_n((D)_l) "
                                                          "with per-n exact RR checks");
  converge->add_option("--divisor", conv_divisor, "divisor file (vertex names of the family)")
      ->required();
  converge->add_option("--support-radius", conv_l, "truncation radius l")->required();
  converge->add_option("--to", conv_to, "largest radius N")->required();
  converge->add_option("--budget", conv_budget, "enumeration node budget per radius");
  converge->add_flag("--raw", conv_raw, "divisor file holds rational values");
  converge->add_flag("--gaps", conv_gaps, "also compute spectral gaps for the CSV");
  converge->add_option("--jobs", conv_jobs, "parallel radii");
  converge->add_option("--stable-k", conv_stable, "consecutive equal values for stabilization");
  converge->add_option("--csv", conv_csv, "write the merged CSV table to this path");
  converge->add_option("--decimal", conv_decimal, "append lossy decimals");

  std::string rep_divisor, rep_divisor2, rep_csv;
  int rep_l = 0, rep_l2 = 0, rep_to = 0, rep_jobs = 1, rep_stable = 2, rep_decimal = 0;
  long long rep_budget = kDefaultBudget;
  bool rep_raw = false;
  CLI::App* rrreport = family->add_subcommand("rr-report", "stabilized rank candidates "
                                                           "and the identity residual");
  rrreport->add_option("--divisor", rep_divisor, "divisor file")->required();
  rrreport->add_option("--support-radius", rep_l, "truncation radius l")->required();
  rrreport->add_option("--to", rep_to, "largest radius N")->required();
  rrreport->add_option("--budget", rep_budget, "enumeration node budget per radius");
  rrreport->add_flag("--raw", rep_raw, "divisor files hold rational values");
  rrreport->add_option("--jobs", rep_jobs, "parallel radii");
  rrreport->add_option("--stable-k", rep_stable, "consecutive equal values for stabilization");
  rrreport->add_option("--divisor2", rep_divisor2, "second divisor for the tail bound");
  rrreport->add_option("--support-radius2", rep_l2, "truncation radius of the second divisor");
  rrreport->add_option("--csv", rep_csv, "write the merged CSV table to this path");
  rrreport->add_option("--decimal", rep_decimal, "append lossy decimals");

  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return 0;
    } catch (const CLI::CallForAllHelp&) {
      out << app.help("", CLI::AppFormatMode::All);
      return 0;
    } catch (const CLI::ParseError& e) {
      err << "usage error: " << e.what() << "\n";
      return 1;
    }
  }

  try {
    if (info->parsed()) {
      const Graph g = load_graph(info_a);
      const int d = info_a.decimal;
      out << "graph: " << g.order() << " vertices, " << g.edge_count() << " edges, base "
          << g.name(g.base()) << "\n";
      out << "x m(x) i(x) K(x)\n";
      const Divisor k = canonical_divisor(g);
      for (int v = 0; v < g.order(); ++v)
        out << g.name(v) << " " << fq(g.mass()(v), d) << " " << fq(g.quantum()(v), d)
            << " " << fq(k.value(v), d) << "\n";
      out << "i_gcd = " << fq(g.quantum_gcd(), d) << "\n";
      out << "euler = " << fq(g.euler(), d) << "\n";
      out << "deg K = " << fq(k.degree(), d) << "\n";
      out << "m(V) = " << fq(g.total_mass(), d) << "\n";
      out << "m_common = " << g.scale().get_str() << "\n";
      return 0;
    }

    if (reduce->parsed()) {
      const Graph g = load_graph(red_a);
      const Divisor d = load_divisor(g, red_a);
      const int base = resolve_base(g, red_a.base);
      const ReductionResult r = red_randomized
                                    ? reduce_divisor_randomized(d, red_seed, base)
                                    : reduce_divisor(d, base);
      out << "reduced divisor:\n";
      print_divisor(out, r.reduced, red_a.decimal);
      out << "firing function:\n";
      for (int v = 0; v < g.order(); ++v)
        out << g.name(v) << " " << r.firing(v).get_str() << "\n";
      out << "phase1_rounds = " << r.phase1_rounds << "\n";
      out << "phase2_fires = " << r.phase2_fires << "\n";
      return 0;
    }

    if (winnable->parsed()) {
      const Graph g = load_graph(win_a);
      const Divisor d = load_divisor(g, win_a);
      const int base = resolve_base(g, win_a.base);
      const WinnableMode mode =
          win_mode == "brute" ? WinnableMode::brute : WinnableMode::reduced;
      out << "mode: " << win_mode << "\n";
      out << (is_winnable(d, mode, win_bound, base) ? "WINNABLE" : "NOT WINNABLE")
          << "\n";
      return 0;
    }

    if (rankc->parsed()) {
      const Graph g = load_graph(rank_a);
      const Divisor d = load_divisor(g, rank_a);
      const int base = resolve_base(g, rank_a.base);
      const RankResult r = rank(d, base, rank_a.budget);
      out << "rank = " << fq(r.rank, rank_a.decimal) << "\n";
      out << "k = " << r.k << "\n";
      out << "tested = " << r.tested << "\n";
      out << "nodes = " << r.nodes << "\n";
      if (r.obstruction) {
        out << "obstruction:\n";
        print_divisor(out, *r.obstruction, rank_a.decimal);
      }
      if (rank_greedy_flag) {
        const Rational greedy = rank_greedy(d, base);
        out << "greedy = " << fq(greedy, rank_a.decimal) << "\n";
        if (greedy == r.rank)
          out << "greedy agrees with rank\n";
        else
          out << "greedy disagrees with rank (heuristic steps by the base quantum, "
                 "not the global one)\n";
      }
      if (!r.exact) {
        err << "budget exhausted: rank is only a verified lower bound\n";
        return 3;
      }
      return 0;
    }

    if (rrc->parsed()) {
      const Graph g = load_graph(rr_a);
      const Divisor d = load_divisor(g, rr_a);
      const RRCheck r = rr_check(d, resolve_base(g, rr_a.base), rr_a.budget);
      out << "r(D) = " << fq(r.d_side.rank, rr_a.decimal) << "\n";
      out << "r(K-D) = " << fq(r.k_side.rank, rr_a.decimal) << "\n";
      out << "lhs = " << fq(r.lhs, rr_a.decimal) << "\n";
      out << "rhs = " << fq(r.rhs, rr_a.decimal) << "\n";
      if (!r.exact) {
        out << "INEXACT\n";
        err << "budget exhausted: one of the ranks is only a lower bound\n";
        return 3;
      }
      out << (r.holds ? "HOLDS" : "FAILS") << "\n";
      return 0;
    }

    if (ordersc->parsed()) {
      const Graph g = load_graph(ord_a);
      const Divisor d = load_divisor(g, ord_a);
      const Rational via_orders = rank_via_orders(d, ord_a.budget);
      const RankResult direct = rank(d, -1, ord_a.budget);
      out << "orders rank = " << fq(via_orders, ord_a.decimal) << "\n";
      out << "rank() = " << fq(direct.rank, ord_a.decimal) << "\n";
      if (!direct.exact) {
        err << "budget exhausted on rank()\n";
        return 3;
      }
      out << (via_orders == direct.rank ? "AGREE" : "DISAGREE") << "\n";
      return 0;
    }

    if (spectralc->parsed()) {
      if (spec_probe == "extension") {
        if (spec_preset.empty())
          throw ValidationError("--probe extension needs --preset");
        const Family fam = make_family(spec_preset, spec_params);
        const ExtensionProbe p = eigen_extension_probe(fam, spec_n, spec_to);
        out << "lambda_" << p.n << " = " << fmt_g(p.lambda_n) << "\n";
        out << "rho_" << p.n << " = " << fq(p.rho_n, spec_decimal) << "\n";
        out << "lhs = " << fmt_g(p.lhs) << "\n";
        out << "rhs = " << fmt_g(p.rhs) << "\n";
        out << "slack = " << fmt_g(p.slack) << "\n";
        out << (p.holds ? "HOLDS" : "FAILS") << "\n";
        return 0;
      }
      if (spec_graph.empty())
        throw ValidationError("spectral needs a graph file unless --probe extension");
      const Graph g = Graph::parse(read_file(spec_graph));
      if (spec_probe.empty()) {
        const SpectralResult s = spectral_gap(g);
        out << "eigenvalues:";
        for (double e : s.eigenvalues) out << " " << fmt_g(e);
        out << "\n";
        out << "gap = " << fmt_g(s.gap) << "\n";
        out << "sweeps = " << s.sweeps << "\n";
        double energy = 0;
        for (const auto& e : g.edges()) {
          const double dd = s.gap_vector(e.u) - s.gap_vector(e.v);
          energy += e.w.to_double() * dd * dd;
        }
        double nsq = 0;
        for (int v = 0; v < g.order(); ++v)
          nsq += g.mass()(v).to_double() * s.gap_vector(v) * s.gap_vector(v);
        out << "rayleigh residual = " << fmt_g(std::abs(energy / nsq - s.gap)) << "\n";
        return 0;
      }
      const Rational eps = Rational::parse(spec_eps);
      SplitMix64 rng(spec_seed);
      const bool want_ball = spec_probe == "escape";
      bool all_hold = true;
      for (int i = 1; i <= spec_count; ++i) {
        const ProbeConfig cfg = random_probe_config(g, rng, want_ball);
        const InequalityProbe p = inequality_probe(g, cfg.subset, cfg.f, eps);
        out << "probe " << i << ": U=" << subset_names(g, cfg.subset)
            << " cross " << fq(p.cross_lhs, spec_decimal) << " <= "
            << fq(p.cross_rhs, spec_decimal) << " "
            << (p.cross_holds ? "HOLDS" : "FAILS");
        all_hold = all_hold && p.cross_holds;
        if (want_ball && p.is_ball) {
          out << " | ball radius " << p.ball_radius << " rho="
              << fq(p.rho_n, spec_decimal) << " escape "
              << fq(p.escape_lhs, spec_decimal) << " <= "
              << fq(p.escape_rhs, spec_decimal) << " "
              << (p.escape_holds ? "HOLDS" : "FAILS");
          all_hold = all_hold && p.escape_holds;
        }
        out << "\n";
      }
      out << (all_hold ? "all probes hold" : "SOME PROBES FAILED") << "\n";
      return 0;
    }

    if (threshold->parsed()) {
      const PoincareThreshold t = poincare_threshold();
      out << "A = " << fmt_fixed(t.A, 6) << "\n";
      out << "argmax a = " << fmt_fixed(t.argmax_a, 6) << "\n";
      const double b_log2 = poincare_b(std::log(2.0)).first;
      out << "B(log 2) = " << fmt_g(b_log2) << (b_log2 == 0.0 ? " (exact)" : "") << "\n";
      return 0;
    }

    if (family->parsed()) {
      const Family fam = make_family(fam_preset, fam_params);
      if (series->parsed()) {
        const ExhaustionSeries es = exhaustion_series(fam, ser_to, ser_gaps, ser_jobs);
        print_series_table(out, es, {}, ser_decimal);
        out << "A = " << fmt_fixed(es.threshold_a, 6) << "\n";
        out << "first n with rho_n < A: "
            << (es.first_n_below_a ? std::to_string(*es.first_n_below_a) : "none")
            << "\n";
        out << "ratio43 strictly decreasing: "
            << (es.ratio43_strictly_decreasing ? "yes" : "no") << "\n";
        if (!ser_csv.empty()) write_csv_file(ser_csv, es, {}, ser_decimal);
        return 0;
      }

      if (converge->parsed()) {
        const SupportDivisor sup =
            support_from_file(fam, conv_l, read_file(conv_divisor), conv_raw);
        const RankSeries rs =
            rank_series(fam, sup, conv_l, conv_to, conv_budget, conv_stable, conv_jobs);
        out << "n r_n r(K-D_n) e_n deg rr\n";
        for (const RankSeriesRow& row : rs.rows)
          out << row.n << " " << fq(row.r, conv_decimal) << " "
              << fq(row.r_kside, conv_decimal) << " " << fq(row.e, conv_decimal) << " "
              << fq(row.deg, conv_decimal) << " " << (row.rr_holds ? "holds" : "FAILS")
              << "\n";
        out << "stable suffix = " << rs.stable_suffix << " (K = " << conv_stable
            << ")\n";
        out << "verdict: " << (rs.stabilized ? "stabilized" : "inconclusive") << "\n";
        if (!conv_csv.empty()) {
          const ExhaustionSeries es =
              exhaustion_series(fam, conv_to, conv_gaps, conv_jobs);
          std::map<int, Rational> ranks;
          for (const RankSeriesRow& row : rs.rows) ranks.emplace(row.n, row.r);
          write_csv_file(conv_csv, es, ranks, conv_decimal);
        }
        if (rs.truncated) {
          err << rs.note << "\n";
          return 3;
        }
        return 0;
      }

      if (rrreport->parsed()) {
        const SupportDivisor sup =
            support_from_file(fam, rep_l, read_file(rep_divisor), rep_raw);
        std::optional<std::pair<SupportDivisor, int>> second;
        if (!rep_divisor2.empty()) {
          if (rep_l2 < 1)
            throw ValidationError("--divisor2 needs --support-radius2");
          second.emplace(support_from_file(fam, rep_l2, read_file(rep_divisor2), rep_raw),
                         rep_l2);
        }
        const InfiniteRRReport rep = infinite_rr_report(
            fam, sup, rep_l, rep_to, rep_budget, rep_stable, rep_jobs, second);
        out << "n r_n r(K-D_n) rr\n";
        for (const RankSeriesRow& row : rep.series.rows)
          out << row.n << " " << fq(row.r, rep_decimal) << " "
              << fq(row.r_kside, rep_decimal) << " "
              << (row.rr_holds ? "holds" : "FAILS") << "\n";
        if (!rep.series.rows.empty()) {
          out << "r^(D) = " << fq(rep.r_hat, rep_decimal) << "\n";
          out << "r^(K-D) = " << fq(rep.r_hat_k, rep_decimal) << "\n";
          out << "e^ = " << fq(rep.e_hat, rep_decimal) << "\n";
          out << "deg = " << fq(rep.deg, rep_decimal) << "\n";
          out << "residual = " << fq(rep.residual, rep_decimal) << "\n";
        }
        out << "verdict: " << rep.verdict << "\n";
        out << "ratio43 vanishing over window: " << (rep.ratio43_vanishing ? "yes" : "no")
            << "\n";
        out << "note: " << rep.disclaimer << "\n";
        if (rep.pair_gap)
          out << "tail bound: |r^ - r^'| = " << fq(*rep.pair_gap, rep_decimal)
              << " <= " << fq(*rep.pair_bound, rep_decimal) << " "
              << (*rep.pair_ok ? "HOLDS" : "FAILS") << "\n";
        if (!rep_csv.empty()) {
          std::map<int, Rational> ranks;
          for (const RankSeriesRow& row : rep.series.rows) ranks.emplace(row.n, row.r);
          write_csv_file(rep_csv, rep.background, ranks, rep_decimal);
        }
        if (rep.series.truncated) {
          err << rep.series.note << "\n";
          return 3;
        }
        return 0;
      }
    }

    err << "usage error: no subcommand\n";
    return 1;
  } catch (const BudgetError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << "\n";
    return 4;
  } catch (const chipfire::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace chipfire::cli
