// orbitquant command-line front end.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "orbitquant/cases.hpp"
#include "orbitquant/md4cat.hpp"
#include "orbitquant/orbits.hpp"
#include "orbitquant/parse.hpp"
#include "orbitquant/quantize.hpp"
#include "orbitquant/repsim.hpp"
#include "orbitquant/starprod.hpp"
#include "orbitquant/verify.hpp"

using namespace orbitquant;
using json = nlohmann::ordered_json;

namespace {

constexpr int kOk = 0, kFailed = 1, kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Comma-separated reals; a token "re:im" contributes two entries (re, im).
std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    try {
      std::size_t used = 0;
      if (colon == std::string::npos) {
        out.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } else {
        const std::string re = tok.substr(0, colon), im = tok.substr(colon + 1);
        out.push_back(std::stod(re, &used));
        if (used != re.size()) throw std::invalid_argument(tok);
        out.push_back(std::stod(im, &used));
        if (used != im.size()) throw std::invalid_argument(tok);
      }
    } catch (const std::logic_error&) {
      throw UsageError(what + ": malformed number '" + tok + "'");
    }
  }
  return out;
}

std::array<double, 4> four_reals(const std::string& text, const std::string& what) {
  const auto v = parse_reals(text, what);
  if (v.size() != 4) throw UsageError(what + ": expected 4 components, got " + std::to_string(v.size()));
  return {v[0], v[1], v[2], v[3]};
}

struct AlgebraOpts {
  std::string family;
  double lambda = 1.0, lambda1 = 1.0, lambda2 = 1.0;
  double phi = std::numbers::pi / 4;

  void add(CLI::App* app) {
    app->add_option("--family", family, "family id, e.g. g411")->required();
    app->add_option("--lambda", lambda, "parameter lambda");
    app->add_option("--lambda1", lambda1, "parameter lambda1");
    app->add_option("--lambda2", lambda2, "parameter lambda2");
    app->add_option("--phi", phi, "parameter phi in (0, pi)");
  }

  AlgebraId id() const {
    return AlgebraId{family_from_id(family), AlgebraParams{lambda, lambda1, lambda2, phi}};
  }
};

struct ChartOpts : AlgebraOpts {
  std::string F;
  std::optional<int> sheet;
  int branch = 1;

  void add(CLI::App* app) {
    AlgebraOpts::add(app);
    app->add_option("--F", F, "dual vector alpha,beta,gamma,delta")->required();
    app->add_option("--sheet", sheet, "sheet index k for local charts");
    app->add_option("--branch", branch, "paraboloid branch sign (+1 or -1)");
  }

  Chart chart() const {
    const auto f = four_reals(F, "--F");
    ChartOptions o;
    o.sheet = sheet.value_or(0);
    o.branch = branch;
    return make_chart(id(), DualVector{f[0], f[1], f[2], f[3]}, o);
  }
};

/// A as a,b,c,d; for g424 also alpha_c,beta_c given as two re:im pairs.
AlgebraElement parse_element(const std::string& text, Family fam, const std::string& what) {
  if (text.find(':') != std::string::npos) {
    if (fam != Family::g424) throw UsageError(what + ": complex components only apply to g424");
    const auto v = parse_reals(text, what);
    if (v.size() != 4) throw UsageError(what + ": expected two re:im pairs");
    // alpha_c = d - i a, beta_c = b + i c
    return AlgebraElement{-v[1], v[2], v[3], v[0]};
  }
  const auto v = four_reals(text, what);
  return AlgebraElement{v[0], v[1], v[2], v[3]};
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json dual_json(const DualVector& F) { return json::array({F.alpha, F.beta, F.gamma, F.delta}); }

json chart_json(const Chart& c) {
  json j;
  j["schema"] = 1;
  j["family"] = c.algebra.id();
  j["F"] = dual_json(c.F);
  j["kind"] = kind_name(c.kind);
  j["orbit"] = c.orbit_tag;
  j["sheet"] = c.sheet;
  json psi = json::array();
  for (const auto& e : c.psi) psi.push_back(to_pretty(e));
  j["psi"] = psi;
  json tensor = json::array();
  for (const auto& pr : c.tensor.pairs)
    tensor.push_back({{"a", var_name(pr.a)}, {"b", var_name(pr.b)}, {"entry", to_pretty(pr.entry)}});
  j["lambda_pq"] = to_pretty(c.lambda_pq());
  j["tensor"] = tensor;
  return j;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("ORBITQUANT_SEED")) {
    try {
      std::size_t used = 0;
      const std::string s(env);
      const unsigned long long v = std::stoull(s, &used);
      if (used == s.size()) return v;
    } catch (const std::logic_error&) {
    }
    throw UsageError(std::string("ORBITQUANT_SEED: not an unsigned integer '") + env + "'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deformation quantization of MD4 co-adjoint orbits"};
  app.fallthrough();
  app.require_subcommand(1);
  std::string out_path;
  app.add_option("-o,--out", out_path, "write output to a file instead of stdout");

  auto* list = app.add_subcommand("list", "JSON catalog of the MD4 families");

  auto* jac = app.add_subcommand("jacobi", "Jacobi defect over random triples");
  AlgebraOpts jac_alg;
  jac_alg.add(jac);
  int jac_trials = 1000;
  std::optional<std::uint64_t> jac_seed;
  double jac_eps = 1e-10;
  jac->add_option("--trials", jac_trials, "number of random triples")->check(CLI::PositiveNumber);
  jac->add_option("--seed", jac_seed, "random seed");
  jac->add_option("--eps-sym", jac_eps, "tolerance");

  auto* orb = app.add_subcommand("orbit", "orbit samples (CSV) or chart report (JSON)");
  ChartOpts orb_chart;
  orb_chart.add(orb);
  int np = 9, nq = 9;
  std::string orb_format = "csv";
  orb->add_option("--np", np, "p samples")->check(CLI::PositiveNumber);
  orb->add_option("--nq", nq, "q samples")->check(CLI::PositiveNumber);
  orb->add_option("--format", orb_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* ham = app.add_subcommand("ham", "Hamiltonian <psi(p,q), A>");
  ChartOpts ham_chart;
  ham_chart.add(ham);
  std::string ham_A;
  bool ham_json = false;
  ham->add_option("--A", ham_A, "element a,b,c,d")->required();
  ham->add_flag("--json", ham_json, "JSON output");

  auto* st = app.add_subcommand("star", "star product u * v");
  std::string st_u, st_v, st_lambda = "1";
  int st_rmax = kDefaultStarOrder;
  bool st_json = false, st_bracket = false;
  st->add_option("--u", st_u, "expression u")->required();
  st->add_option("--v", st_v, "expression v")->required();
  st->add_option("--lambda", st_lambda, "Poisson tensor entry Lambda^{pq} as an expression");
  st->add_option("--rmax", st_rmax, "truncation order")->check(CLI::Range(0, kMaxStarOrder));
  st->add_flag("--bracket", st_bracket, "print i u * i v - i v * i u instead");
  st->add_flag("--json", st_json, "JSON output with the per-order breakdown");

  auto* lh = app.add_subcommand("lhat", "quantized operator lhat_A");
  ChartOpts lh_chart;
  lh_chart.add(lh);
  std::string lh_A;
  int lh_order = kDefaultTruncation;
  bool lh_json = false;
  lh->add_option("--A", lh_A, "element a,b,c,d (g424: alpha_c,beta_c as re:im pairs)")->required();
  lh->add_option("--order", lh_order, "truncation order for the paraboloid")->check(CLI::PositiveNumber);
  lh->add_flag("--json", lh_json, "JSON output");

  auto* ver = app.add_subcommand("verify", "run verification suites");
  std::string suite = "all";
  int trials = 50;
  std::optional<std::uint64_t> ver_seed;
  std::optional<double> eps_sym, eps_num;
  ver->add_option("--suite", suite, "suite name, comma list, or all");
  ver->add_option("--trials", trials, "random trials per case")->check(CLI::PositiveNumber);
  ver->add_option("--seed", ver_seed, "random seed (default: ORBITQUANT_SEED, else 0)");
  ver->add_option("--eps-sym", eps_sym, "override symbolic tolerances");
  ver->add_option("--eps-num", eps_num, "override numeric tolerances");

  auto* ev = app.add_subcommand("evolve", "flow exp(u lhat_A) applied to a Gaussian");
  ChartOpts ev_chart;
  ev_chart.add(ev);
  std::string ev_A, ev_format = "json", ev_grid = "-12,12,2048";
  double ev_time = 1.0, ev_center = 0.0, ev_width = 1.0;
  int ev_steps = kDefaultFlowSteps;
  ev->add_option("--A", ev_A, "element a,b,c,d")->required();
  ev->add_option("--time,-u", ev_time, "flow time u");
  ev->add_option("--steps", ev_steps, "integration steps")->check(CLI::PositiveNumber);
  ev->add_option("--grid", ev_grid, "lo,hi,n");
  ev->add_option("--center", ev_center, "Gaussian center");
  ev->add_option("--width", ev_width, "Gaussian width")->check(CLI::PositiveNumber);
  ev->add_option("--format", ev_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (list->parsed()) {
      json j;
      j["schema"] = 1;
      j["families"] = catalog_json();
      emit(dump(j), out_path);
      return kOk;
    }

    if (jac->parsed()) {
      const AlgebraId id = jac_alg.id();
      Rng rng(resolve_seed(jac_seed));
      double worst = 0.0;
      for (int k = 0; k < jac_trials; ++k) {
        const AlgebraElement A = random_element(rng), B = random_element(rng), C = random_element(rng);
        worst = std::max(worst, jacobi_defect(id, A, B, C));
      }
      json j;
      j["schema"] = 1;
      j["family"] = id.id();
      j["trials"] = jac_trials;
      j["max_defect"] = worst;
      j["tolerance"] = jac_eps;
      j["pass"] = worst < jac_eps;
      emit(dump(j), out_path);
      return worst < jac_eps ? kOk : kFailed;
    }

    if (orb->parsed()) {
      const Chart c = orb_chart.chart();
      if (orb_format == "json") {
        emit(dump(chart_json(c)), out_path);
        return kOk;
      }
      GridSpec g = default_grid(c);
      g.np = np;
      g.nq = nq;
      std::ostringstream os;
      os.precision(17);
      os << "x,y,z,t,p,q\n";
      for (const auto& pt : sample_orbit(c, g))
        os << pt.G[0] << ',' << pt.G[1] << ',' << pt.G[2] << ',' << pt.G[3] << ',' << pt.p << ',' << pt.q << '\n';
      emit(os.str(), out_path);
      return kOk;
    }

    if (ham->parsed()) {
      const Chart c = ham_chart.chart();
      const Hamiltonian h = hamiltonian(c, parse_element(ham_A, c.algebra.family(), "--A"));
      if (ham_json) {
        json j;
        j["schema"] = 1;
        j["family"] = c.algebra.id();
        j["full"] = to_pretty(h.full);
        j["canonical"] = to_string(h.full);
        if (h.affine_in_p) {
          j["phi"] = to_pretty(h.phi);
          j["psi"] = to_pretty(h.psi_fn);
        }
        emit(dump(j), out_path);
      } else {
        emit(to_pretty(h.full) + "\n", out_path);
      }
      return kOk;
    }

    if (st->parsed()) {
      const Expr u = parse_expr(st_u), v = parse_expr(st_v);
      const PoissonTensor T = PoissonTensor::canonical(parse_expr(st_lambda));
      if (st_bracket) {
        emit(to_pretty(star_bracket(u, v, T, st_rmax)) + "\n", out_path);
        return kOk;
      }
      const StarResult r = star_detailed(u, v, T, st_rmax);
      if (st_json) {
        json j;
        j["schema"] = 1;
        j["result"] = to_pretty(r.value);
        j["canonical"] = to_string(r.value);
        j["status"] = r.exact ? "exact" : "truncated";
        j["last_order"] = r.last_order;
        json terms = json::array();
        for (std::size_t k = 0; k < r.terms.size(); ++k) terms.push_back({{"r", k}, {"expr", to_pretty(r.terms[k])}});
        j["terms"] = terms;
        emit(dump(j), out_path);
      } else {
        emit(to_pretty(r.value) + (r.exact ? "" : "  [truncated]") + "\n", out_path);
      }
      return kOk;
    }

    if (lh->parsed()) {
      const Chart c = lh_chart.chart();
      const Lhat op = lhat(c, parse_element(lh_A, c.algebra.family(), "--A"), lh_order);
      const std::string text = std::visit([](const auto& o) { return to_pretty(o); }, op);
      if (lh_json) {
        json j;
        j["schema"] = 1;
        j["family"] = c.algebra.id();
        j["kind"] = std::holds_alternative<DiffOp1>(op) ? "first-order" : std::holds_alternative<DiffOpAffC>(op) ? "affine-complex" : "truncated-series";
        j["operator"] = text;
        emit(dump(j), out_path);
      } else {
        emit(text + "\n", out_path);
      }
      return kOk;
    }

    if (ver->parsed()) {
      VerifyConfig cfg{resolve_seed(ver_seed), trials, eps_sym, eps_num};
      std::vector<int> which;
      if (suite == "all") {
        for (std::size_t k = 0; k < suite_names().size(); ++k) which.push_back(static_cast<int>(k));
      } else {
        std::stringstream ss(suite);
        std::string name;
        while (std::getline(ss, name, ',')) {
          const int k = suite_index(name);
          if (k < 0) throw UsageError("unknown suite '" + name + "'");
          which.push_back(k);
        }
        std::sort(which.begin(), which.end());
        which.erase(std::unique(which.begin(), which.end()), which.end());
      }
      std::vector<SuiteReport> reports;
      for (int k : which) reports.push_back(run_suite(k, cfg));
      const json j = verify_report(reports, cfg);
      emit(dump(j), out_path);
      return j["pass"].get<bool>() ? kOk : kFailed;
    }

    if (ev->parsed()) {
      const Chart c = ev_chart.chart();
      const Lhat l = lhat(c, parse_element(ev_A, c.algebra.family(), "--A"));
      const auto* op = std::get_if<DiffOp1>(&l);
      if (!op) throw UsageError("evolve: needs a chart whose lhat is first order in s");
      const auto gv = parse_reals(ev_grid, "--grid");
      if (gv.size() != 3 || !(gv[1] > gv[0]) || gv[2] < 2 || gv[2] != std::floor(gv[2]))
        throw UsageError("--grid: expected lo,hi,n with lo < hi and integer n >= 2");
      const SGrid grid{gv[0], gv[1], static_cast<int>(gv[2])};
      const FlowResult r = evolve(*op, ev_time, gaussian(grid, ev_center, ev_width), grid, ev_steps);
      if (ev_format == "csv") {
        emit(to_csv(r), out_path);
      } else {
        json j;
        j["schema"] = 1;
        j["family"] = c.algebra.id();
        j["operator"] = to_pretty(*op);
        j["flow"] = to_json(r);
        emit(dump(j), out_path);
      }
      return kOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "orbitquant: " << e.what() << "\n";
    return kUsage;
  } catch (const CatalogError& e) {
    std::cerr << "orbitquant: " << e.what() << "\n";
    return kUsage;
  } catch (const ChartError& e) {
    std::cerr << "orbitquant: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "orbitquant: " << e.what() << "\n";
    return kUsage;
  } catch (const AlgebraError& e) {
    std::cerr << "orbitquant: " << e.what() << "\n";
    return kUsage;
  } catch (const OperatorError& e) {
    std::cerr << "orbitquant: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "orbitquant: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}
