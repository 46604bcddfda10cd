#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fmcert/certificates.hpp"
#include "fmcert/chaos_sim.hpp"
#include "fmcert/empirics.hpp"
#include "fmcert/gallery.hpp"
#include "fmcert/krr.hpp"
#include "fmcert/mc.hpp"
#include "fmcert/she.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitConsistency = 3;
constexpr int kExitSandwich = 4;

struct Globals {
  std::uint64_t seed = 12345;
  std::uint64_t samples = 100000;
  int shards = 8;
  std::string out = "out";
  std::string config_path;
};

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Resolved config is embedded in every report and names the report file.
fs::path report_path(const Globals& g, const std::string& stem, const json& config,
                     const std::string& ext) {
  return fs::path(g.out) / (stem + "-" + fnv1a_hex(config.dump()) + ext);
}

void emit_report(const Globals& g, const std::string& stem, json report,
                 const json& config) {
  report["config"] = config;
  write_text(report_path(g, stem, config, ".json"), report.dump(2) + "\n");
}

// Minimal SVG polyline plot; skipped (with a warning) for fewer than 2 points.
void emit_plot(const fs::path& path, const std::string& title,
               const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2) {
    std::cerr << "warning: series '" << title << "' has fewer than 2 points, plot skipped\n";
    return;
  }
  double xmin = xs[0], xmax = xs[0], ymin = ys[0], ymax = ys[0];
  for (size_t i = 0; i < xs.size(); ++i) {
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymin = std::min(ymin, ys[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double w = 640, h = 400, pad = 50;
  std::ostringstream svg;
  svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << w / 2 << "' y='20' text-anchor='middle'>" << title
      << "</text>\n<polyline fill='none' stroke='black' points='";
  for (size_t i = 0; i < xs.size(); ++i) {
    double px = pad + (xs[i] - xmin) / (xmax - xmin) * (w - 2 * pad);
    double py = h - pad - (ys[i] - ymin) / (ymax - ymin) * (h - 2 * pad);
    svg << px << "," << py << " ";
  }
  svg << "'/>\n</svg>\n";
  write_text(path, svg.str());
}

json globals_json(const Globals& g) {
  return json{{"seed", g.seed}, {"samples", g.samples}, {"shards", g.shards},
              {"out", g.out}};
}

int run_certify(const Globals& g, const std::string& expansion_path,
                const std::string& target_path, std::vector<int> n_grid,
                std::vector<int> m_grid, bool fixed_chaos) {
  fmcert::ChaosExpansion f;
  fmcert::TargetSpec target;
  try {
    f = fmcert::load_expansion(expansion_path);
    target = fmcert::load_target(target_path);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  if (target.Hdim != f.Hdim) {
    std::cerr << "consistency error: expansion and target truncations differ\n";
    return kExitConsistency;
  }
  if (m_grid.empty())
    for (int m = 1; m <= f.Hdim; ++m) m_grid.push_back(m);
  if (n_grid.empty())
    for (int n = 1; n <= std::max(1, f.max_order()); ++n) n_grid.push_back(n);
  json config = globals_json(g);
  config["command"] = "certify";
  config["expansion"] = expansion_path;
  config["target"] = target_path;
  config["N_grid"] = n_grid;
  config["m_grid"] = m_grid;
  config["fixed_chaos"] = fixed_chaos;
  try {
    fmcert::CertificateReport rep;
    if (fixed_chaos) {
      if (f.kernels.size() != 1 || !target.order(f.max_order()) ||
          target.orders.size() != 1) {
        std::cerr << "consistency error: fixed-chaos mode needs a single-order "
                     "expansion and a matching single-order target\n";
        return kExitConsistency;
      }
      rep = fmcert::fixed_chaos_bound(*f.kernel(f.max_order()),
                                      *target.order(f.max_order()), m_grid);
    } else {
      rep = fmcert::theorem35_bound(f, target, n_grid, m_grid);
    }
    emit_report(g, "certify", fmcert::to_json(rep), config);
    write_text(report_path(g, "certify", config, ".csv"), fmcert::grid_table_csv(rep));
    std::cout << "bound " << rep.bound << " at N=" << rep.N << " m=" << rep.m << "\n";
  } catch (const std::exception& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kExitConsistency;
  }
  return 0;
}

int run_validate(const Globals& g, const std::string& expansion_path,
                 const std::string& target_path) {
  if (g.samples == 0) {
    std::cerr << "input error: zero-sample validation run\n";
    return kExitInput;
  }
  fmcert::ChaosExpansion f;
  fmcert::TargetSpec target;
  try {
    f = fmcert::load_expansion(expansion_path);
    target = fmcert::load_target(target_path);
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  if (target.Hdim != f.Hdim) {
    std::cerr << "consistency error: truncation mismatch\n";
    return kExitConsistency;
  }
  json config = globals_json(g);
  config["command"] = "validate";
  config["expansion"] = expansion_path;
  config["target"] = target_path;
  try {
    fmcert::OperatorMatrix t_z = target.aggregate();
    auto sf = fmcert::sample_expansion_matrix(f, g.samples, g.seed, g.shards);
    auto sz = fmcert::sample_gaussian_matrix(t_z, g.samples, g.seed + 1, g.shards);
    auto dict = fmcert::TestFunctionDictionary::standard(f.Hdim, g.seed + 2);
    auto d2 = fmcert::d2_lower_bound(sf, sz, dict);
    auto stein = fmcert::mc_stein_gap(f, t_z, g.samples, g.seed + 3, g.shards);
    std::vector<int> n_grid, m_grid;
    for (int n = 1; n <= std::max(1, f.max_order()); ++n) n_grid.push_back(n);
    for (int m = 1; m <= f.Hdim; ++m) m_grid.push_back(m);
    auto cert = fmcert::theorem35_bound(f, target, n_grid, m_grid);
    bool pass_stein = d2.value - 3 * d2.stderr_ <= stein.value + 3 * stein.stderr_;
    bool pass_cert = d2.value - 3 * d2.stderr_ <= cert.bound;
    json rep{{"d2_lower", d2.value},
             {"d2_stderr", d2.stderr_},
             {"d2_argmax_entry", d2.argmax_entry},
             {"dictionary_size", d2.dictionary_size},
             {"stein_mc", stein.to_json()},
             {"certificate", fmcert::to_json(cert)},
             {"sigma_factor", 3},
             {"pass", pass_stein && pass_cert}};
    emit_report(g, "validate", rep, config);
    std::cout << (pass_stein && pass_cert ? "PASS" : "FAIL") << " d2_lower="
              << d2.value << " stein=" << stein.value << " bound=" << cert.bound << "\n";
    if (!(pass_stein && pass_cert)) return kExitSandwich;
  } catch (const std::exception& e) {
    std::cerr << "consistency error: " << e.what() << "\n";
    return kExitConsistency;
  }
  return 0;
}

int run_gallery(const Globals& g, int m, std::vector<int> n_grid) {
  if (n_grid.empty()) n_grid = {10, 100, 1000};
  json config = globals_json(g);
  config["command"] = "gallery";
  config["m"] = m;
  config["n_grid"] = n_grid;
  auto ex = fmcert::example11_pair(m);
  fs::create_directories(g.out);
  fmcert::save_operator(ex.t1, (fs::path(g.out) / "example11_t1.json").string());
  fmcert::save_operator(ex.t2, (fs::path(g.out) / "example11_t2.json").string());
  write_text(fs::path(g.out) / "example11_claims.json",
             fmcert::to_json(ex.info).dump(2) + "\n");
  bool ok = ex.info.all_pass();
  json cases = json::array();
  cases.push_back(fmcert::to_json(ex.info));
  for (int n : n_grid) {
    auto r = fmcert::remark315_sequence(2.0, 0.75, n, std::max(n, 12));
    std::string stem = "remark315_n" + std::to_string(n);
    fmcert::save_expansion(r.f_n, (fs::path(g.out) / (stem + "_expansion.json")).string());
    fmcert::save_operator(r.t_z, (fs::path(g.out) / (stem + "_target.json")).string());
    write_text(fs::path(g.out) / (stem + "_claims.json"),
               fmcert::to_json(r.info).dump(2) + "\n");
    ok = ok && r.info.all_pass();
    cases.push_back(fmcert::to_json(r.info));
  }
  emit_report(g, "gallery", json{{"cases", cases}, {"all_pass", ok}}, config);
  std::cout << (ok ? "all gallery claims pass" : "gallery claim FAILED") << "\n";
  return ok ? 0 : kExitConsistency;
}

int run_she(const Globals& g, const std::string& q_family, double beta, int K,
            std::vector<int> n_list, double T, std::vector<double> t_grid) {
  fmcert::HeatModel model{q_family, beta, K};
  try {
    model.validate();
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  if (n_list.empty()) n_list = {2, 4, 8};
  json config = globals_json(g);
  config["command"] = "she";
  config["q_family"] = q_family;
  config["beta"] = beta;
  config["K"] = K;
  config["n"] = n_list;
  config["T"] = T;
  config["t_grid"] = t_grid;

  std::ostringstream csv;
  csv.precision(17);
  csv << "n,T,bound,mc_weak_error,mc_stderr\n";
  std::vector<double> xs, ys;
  json rows = json::array();
  auto dict = fmcert::TestFunctionDictionary::standard(K, g.seed);
  for (int n : n_list) {
    auto wb = fmcert::weak_error_bound(model, n, T);
    // MC weak error: worst dictionary gap between full and Galerkin solutions.
    auto full = fmcert::covariance_at_time(model, T);
    auto proj = fmcert::galerkin_covariance(model, n, T);
    auto sf = fmcert::sample_gaussian_matrix(full, g.samples, g.seed + n, g.shards);
    auto sp = fmcert::sample_gaussian_matrix(proj, g.samples, g.seed + n + 1000, g.shards);
    auto d2 = fmcert::d2_lower_bound(sf, sp, dict);
    csv << n << ',' << T << ',' << wb.bound << ',' << d2.value << ',' << d2.stderr_ << '\n';
    rows.push_back({{"n", n}, {"T", T}, {"bound", wb.bound},
                    {"truncated_sum", wb.truncated_sum}, {"remainder", wb.remainder},
                    {"mc_weak_error", d2.value}, {"mc_stderr", d2.stderr_}});
    xs.push_back(n);
    ys.push_back(wb.bound);
  }
  json rep{{"weak_error", rows}};
  if (!t_grid.empty()) {
    std::vector<int> n_g{1}, m_g;
    for (int m = 1; m <= K; ++m) m_g.push_back(m);
    fmcert::ChaosExpansion f0 = fmcert::ChaosExpansion::empty(1, K);
    json decay = json::array();
    for (double t : t_grid) {
      auto cert = fmcert::invariant_gap_certificate(model, f0, t, n_g, m_g);
      decay.push_back({{"t", t}, {"bound", cert.bound}});
    }
    rep["invariant_decay"] = decay;
  }
  emit_report(g, "she", rep, config);
  write_text(report_path(g, "she", config, ".csv"), csv.str());
  emit_plot(report_path(g, "she_bound_vs_n", config, ".svg"), "weak error bound vs n",
            xs, ys);
  std::cout << "she report written\n";
  return 0;
}

int run_krr(const Globals& g, std::vector<double> mu, const std::string& phi,
            double lambda, double sigma2, int p, std::vector<int> n_grid) {
  if (n_grid.empty()) n_grid = {10, 100, 1000};
  fmcert::MercerSpec mercer{mu, phi};
  try {
    mercer.validate();
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  json config = globals_json(g);
  config["command"] = "krr";
  config["mu"] = mu;
  config["phi"] = phi;
  config["lambda"] = lambda;
  config["sigma2"] = sigma2;
  config["p"] = p;
  config["n_grid"] = n_grid;

  // Dense-design reference for the limit covariance.
  auto ref = fmcert::KRRSetup::make(fmcert::equispaced_design(4096), mercer, lambda,
                                    p, sigma2);
  fmcert::OperatorMatrix gamma = fmcert::empirical_cov(ref);

  std::ostringstream csv;
  csv.precision(17);
  csv << "n,bound,R3,cov_gap_direct,cov_gap_certified,contraction_sum_max,contraction_bound\n";
  std::vector<double> xs, ys;
  json rows = json::array();
  std::vector<int> m_grid;
  for (int m = 1; m <= mercer.rank(); ++m) m_grid.push_back(m);
  for (int n : n_grid) {
    auto setup = fmcert::KRRSetup::make(fmcert::equispaced_design(n), mercer, lambda,
                                        p, sigma2);
    auto cert = fmcert::krr_clt_certificate(setup, gamma, m_grid);
    csv << n << ',' << cert.report.bound << ',' << cert.report.R3 << ','
        << cert.gap.direct << ',' << cert.gap.certified << ','
        << cert.contraction_sum_max << ',' << cert.contraction_bound << '\n';
    rows.push_back({{"n", n}, {"report", fmcert::to_json(cert.report)},
                    {"cov_gap_direct", cert.gap.direct},
                    {"cov_gap_certified", cert.gap.certified}});
    xs.push_back(n);
    ys.push_back(cert.report.R3);
  }
  emit_report(g, "krr", json{{"decay", rows}}, config);
  write_text(report_path(g, "krr", config, ".csv"), csv.str());
  emit_plot(report_path(g, "krr_r3_vs_n", config, ".svg"), "contraction term vs n", xs, ys);
  std::cout << "krr report written\n";
  return 0;
}

int run_corpus(const Globals& g, int cases) {
  json config = globals_json(g);
  config["command"] = "corpus";
  config["cases"] = cases;
  std::mt19937_64 rng(fmcert::splitmix64(g.seed));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> order_dist(2, 4);
  std::uniform_int_distribution<int> dim_dist(2, 6);
  fs::create_directories(g.out);
  json index = json::array();
  for (int c = 0; c < cases; ++c) {
    int p = order_dist(rng);
    int d = dim_dist(rng);
    fmcert::RawTensor raw;
    raw.order = p;
    raw.dim = d;
    std::function<void(fmcert::IndexTuple&)> fill = [&](fmcert::IndexTuple& idx) {
      if (static_cast<int>(idx.size()) == p) {
        raw.add(idx, gauss(rng) / 4.0);
        return;
      }
      for (int k = idx.empty() ? 1 : idx.back(); k <= d; ++k) {
        idx.push_back(k);
        fill(idx);
        idx.pop_back();
      }
    };
    fmcert::IndexTuple idx;
    fill(idx);
    fmcert::Kernel kern = fmcert::Kernel::zero(p, d, 1);
    kern.component(1) = fmcert::symmetrize(raw);
    fmcert::ChaosExpansion f = fmcert::ChaosExpansion::empty(d, 1);
    fmcert::Kernel copy = kern;
    f.set_kernel(std::move(copy));
    std::string stem = "corpus_case_" + std::to_string(c);
    fmcert::save_expansion(f, (fs::path(g.out) / (stem + ".json")).string());
    index.push_back({{"file", stem + ".json"}, {"p", p}, {"d", d}});
  }
  emit_report(g, "corpus", json{{"cases", index}}, config);
  std::cout << cases << " corpus cases written\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fourth-moment certificate toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--seed", g.seed, "master RNG seed");
  app.add_option("--samples", g.samples, "Monte-Carlo sample budget");
  app.add_option("--shards", g.shards, "worker shard count");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--config", g.config_path, "JSON config file with flag overrides");

  std::string expansion_path, target_path;
  std::vector<int> n_grid, m_grid;
  bool fixed_chaos = false;
  auto* certify = app.add_subcommand("certify", "evaluate a distance certificate");
  certify->add_option("--expansion", expansion_path)->required();
  certify->add_option("--target", target_path)->required();
  certify->add_option("--N-grid", n_grid);
  certify->add_option("--m-grid", m_grid);
  certify->add_flag("--fixed-chaos", fixed_chaos);

  auto* validate = app.add_subcommand("validate", "MC sandwich validation");
  validate->add_option("--expansion", expansion_path)->required();
  validate->add_option("--target", target_path)->required();

  int gallery_m = 4;
  std::vector<int> gallery_n;
  auto* gallery = app.add_subcommand("gallery", "generate counterexample cases");
  gallery->add_option("--m", gallery_m);
  gallery->add_option("--n-grid", gallery_n);

  std::string q_family = "power";
  double beta = 2.0, T = 0.5;
  int K = 64;
  std::vector<int> she_n;
  std::vector<double> t_grid;
  auto* she = app.add_subcommand("she", "stochastic heat equation certificates");
  she->add_option("--q-family", q_family);
  she->add_option("--beta", beta);
  she->add_option("--K", K);
  she->add_option("--n", she_n);
  she->add_option("--T", T);
  she->add_option("--t-grid", t_grid);

  std::vector<double> mu{1.0, 0.5, 0.25};
  std::string phi = "fourier";
  double lambda = 0.1, sigma2 = 1.0;
  int p = 2;
  std::vector<int> krr_n;
  auto* krr = app.add_subcommand("krr", "kernel ridge regression CLT certificates");
  krr->add_option("--mu", mu);
  krr->add_option("--phi", phi);
  krr->add_option("--lambda", lambda);
  krr->add_option("--sigma2", sigma2);
  krr->add_option("--p", p);
  krr->add_option("--n-grid", krr_n);

  int corpus_cases = 50;
  auto* corpus = app.add_subcommand("corpus", "generate the random kernel corpus");
  corpus->add_option("--cases", corpus_cases);

  CLI11_PARSE(app, argc, argv);

  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) {
      std::cerr << "input error: cannot open config " << g.config_path << "\n";
      return kExitInput;
    }
    json cfg;
    try {
      in >> cfg;
    } catch (const std::exception& e) {
      std::cerr << "input error: " << e.what() << "\n";
      return kExitInput;
    }
    if (cfg.contains("seed")) g.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("samples")) g.samples = cfg["samples"].get<std::uint64_t>();
    if (cfg.contains("shards")) g.shards = cfg["shards"].get<int>();
    if (cfg.contains("out")) g.out = cfg["out"].get<std::string>();
  }

  try {
    if (certify->parsed())
      return run_certify(g, expansion_path, target_path, n_grid, m_grid, fixed_chaos);
    if (validate->parsed()) return run_validate(g, expansion_path, target_path);
    if (gallery->parsed()) return run_gallery(g, gallery_m, gallery_n);
    if (she->parsed()) return run_she(g, q_family, beta, K, she_n, T, t_grid);
    if (krr->parsed()) return run_krr(g, mu, phi, lambda, sigma2, p, krr_n);
    if (corpus->parsed()) return run_corpus(g, corpus_cases);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConsistency;
  }
  return 0;
}
