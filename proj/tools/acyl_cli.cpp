// acyl: command-line front end.
//
// Exit status: 0 success, 1 validation or computation error, 2 negative
// verdict (hypothesis violated / check failed).

#include <acyl/catalog.hpp>
#include <acyl/curves.hpp>
#include <acyl/fredholm.hpp>
#include <acyl/gluer.hpp>
#include <acyl/spectral.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace {

constexpr int kOk = 0, kFailed = 1, kNegative = 2;

struct Output {
  std::string path;
  std::string format;  // json | csv | "" (from the extension, default json)

  std::string resolved() const {
    if (!format.empty()) return format;
    if (path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return "csv";
    return "json";
  }

  void write(const std::string& text) const {
    if (path.empty() || path == "-") {
      std::cout << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw acyl::InvalidInput("cannot write '" + path + "'");
    f << text;
  }
  void write(const json& j) const { write(j.dump(2) + "\n"); }
};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw acyl::InvalidInput("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// JSON parse with a 1-based line number in the diagnostic.
json parse_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto > 0 ? upto - 1 : 0), '\n');
    throw acyl::DatasetValidation(static_cast<int>(line), path + ": malformed JSON");
  }
}

acyl::spectral::LatticeTorus lattice_from(const std::string& name, const std::vector<double>& b1,
                                          const std::vector<double>& b2) {
  if (!b1.empty() || !b2.empty()) {
    if (b1.size() != 2 || b2.size() != 2) throw acyl::InvalidInput("--b1 and --b2 take two numbers each");
    return {{b1[0], b1[1]}, {b2[0], b2[1]}};
  }
  if (auto l = acyl::spectral::LatticeTorus::preset(name)) return *l;
  throw acyl::InvalidInput("unknown lattice preset '" + name + "'");
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerics for associative gluing on asymptotically cylindrical G2-manifolds"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key = value configuration file; unknown keys are rejected");
  app.allow_config_extras(CLI::config_extras_mode::error);
  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "seed for sampled operations");
  Output out;
  app.add_option("--out", out.path, "output path (default stdout)");
  app.add_option("--format", out.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Laplace spectrum and indicial roots of a flat torus");
  std::string lattice = "square2pi";
  std::vector<double> b1, b2;
  double cutoff = 10.0;
  spectrum->add_option("--lattice", lattice, "square2pi or hex-first2");
  spectrum->add_option("--b1", b1, "first lattice vector")->expected(2);
  spectrum->add_option("--b2", b2, "second lattice vector")->expected(2);
  spectrum->add_option("--cutoff", cutoff, "eigenvalue cutoff");

  // index
  auto* index = app.add_subcommand("index", "Fredholm index of the Fueter operator at a rate vector");
  std::vector<std::string> ends{"square2pi"};
  std::vector<double> rate;
  std::string mode = "full";
  double end_cutoff = 30.0;
  index->add_option("--ends", ends, "lattice preset per end")->delimiter(',');
  index->add_option("--rate", rate, "rate per end")->delimiter(',')->required();
  index->add_option("--cutoff", end_cutoff, "spectral cutoff per end");
  index->add_option("--mode", mode, "full, fixed or varying")->check(CLI::IsMember({"full", "fixed", "varying"}));

  // curve
  auto* curve = app.add_subcommand("curve", "normal-bundle cohomology and rigidity of ACyl holomorphic curves");
  int m = -1, k = 0, mmax = 6, kmin = -4, kmax = 8;
  curve->add_option("--m", m, "single m (with --k)");
  curve->add_option("--k", k, "single k");
  curve->add_option("--mmax", mmax, "grid: m in [0, mmax]");
  curve->add_option("--kmin", kmin, "grid: smallest k");
  curve->add_option("--kmax", kmax, "grid: largest k");

  // hypothesis
  auto* hypothesis = app.add_subcommand("hypothesis", "run a gluing-hypothesis checker on a JSON file");
  std::string input;
  hypothesis->add_option("--input", input, "JSON input")->required();

  // catalog
  auto* catalog = app.add_subcommand("catalog", "Fano threefold catalog and sphere-pair enumeration");
  std::string filter = "all", catalog_file;
  bool pairs = false, examples = false;
  catalog->add_option("--filter", filter, "all, very-ample or line-candidates")
      ->check(CLI::IsMember({"all", "very-ample", "line-candidates"}));
  catalog->add_flag("--pairs", pairs, "enumerate (line candidate, very ample) pairs");
  catalog->add_flag("--examples", examples, "check the example records");
  catalog->add_option("--file", catalog_file, "catalog CSV (default: embedded copy)");

  // glue
  auto* glue = app.add_subcommand("glue", "run a model gluing preset over a T grid");
  std::string preset = "generic-d2m1", glue_lattice = "square2pi";
  int tmin = 3, tmax = 12, mode_cutoff = 8;
  glue->add_option("--preset", preset, "preset name")->check(CLI::IsMember(acyl::gluer::ModelGluingProblem::preset_names()));
  glue->add_option("--tmin", tmin, "smallest T");
  glue->add_option("--tmax", tmax, "largest T");
  glue->add_option("--lattice", glue_lattice, "cross-section lattice preset");
  glue->add_option("--mode-cutoff", mode_cutoff, "Fourier cutoff |k| <= Xi");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kFailed;
  }

  try {
    const std::string fmt = out.resolved();
    if (*spectrum) {
      const auto table = acyl::spectral::laplace_spectrum_torus(lattice_from(lattice, b1, b2), cutoff);
      const auto ind = acyl::spectral::torus_indicial_data(table);
      if (fmt == "csv") {
        std::string s = "eigenvalue,multiplicity\n";
        for (const auto& e : table.entries) s += num(e.eigenvalue) + "," + std::to_string(e.multiplicity) + "\n";
        out.write(s);
      } else {
        out.write(json{{"spectrum", acyl::spectral::to_json(table)}, {"indicial", acyl::spectral::to_json(ind)}});
      }
    } else if (*index) {
      acyl::fredholm::EndSpectrum es;
      for (const auto& name : ends) {
        es.ends.push_back(acyl::spectral::torus_indicial_data(
            acyl::spectral::laplace_spectrum_torus(lattice_from(name, {}, {}), end_cutoff)));
        es.labels.push_back(name);
      }
      if (mode == "varying") {
        const int v = acyl::fredholm::index_varying_cross_section(es);
        if (fmt == "csv") out.write("index\n" + std::to_string(v) + "\n");
        else out.write(json{{"index", v}, {"mode", mode}});
      } else {
        const auto rep = mode == "full" ? acyl::fredholm::index_full(es, rate)
                                        : acyl::fredholm::index_fixed_cross_section(es, rate);
        if (fmt == "csv") {
          std::string s = "end,d0,sign,value\n";
          for (std::size_t i = 0; i < rep.per_end.size(); ++i)
            s += es.labels[i] + "," + std::to_string(rep.per_end[i].d0) + "," + std::to_string(rep.per_end[i].sign) +
                 "," + std::to_string(rep.per_end[i].value) + "\n";
          s += "total,,," + std::to_string(rep.index) + "\n";
          out.write(s);
        } else {
          out.write(acyl::fredholm::to_json(rep));
        }
      }
    } else if (*curve) {
      std::vector<std::pair<int, int>> grid;
      if (m >= 0) grid.emplace_back(m, k);
      else
        for (int mm = 0; mm <= mmax; ++mm)
          for (int kk = kmin; kk <= kmax; ++kk) grid.emplace_back(mm, kk);
      json rows = json::array();
      std::string s = "m,k,h0_N,h1_N,h0_N_minus_xbar,rigid\n";
      for (auto [mm, kk] : grid) {
        const acyl::curves::CurveData c{mm, kk, std::nullopt, {}};
        const auto h = acyl::curves::normal_cohomology(c);
        const bool rigid = acyl::curves::rigidity_criterion(c);
        rows.push_back({{"m", mm}, {"k", kk}, {"h0_N", h.h0_N}, {"h1_N", h.h1_N},
                        {"h0_N_minus_xbar", h.h0_N_minus_xbar}, {"rigid", rigid}});
        s += std::to_string(mm) + "," + std::to_string(kk) + "," + std::to_string(h.h0_N) + "," +
             std::to_string(h.h1_N) + "," + std::to_string(h.h0_N_minus_xbar) + "," + (rigid ? "true" : "false") + "\n";
      }
      if (fmt == "csv") out.write(s);
      else out.write(grid.size() == 1 ? rows[0] : rows);
    } else if (*hypothesis) {
      const json j = parse_json_file(input);
      acyl::curves::HypothesisReport rep;
      try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "holo") {
          const auto plus = acyl::curves::curve_from_json(j.at("plus"));
          const auto minus = acyl::curves::curve_from_json(j.at("minus"));
          const auto matching = j.at("matching").get<std::vector<int>>();
          const auto rot = acyl::curves::matrix_from_json(j.at("rotation"));
          rep = acyl::curves::check_holo_gluing_hypothesis(plus, minus, matching, rot);
          if (!rep.transverse && plus.ev_image) {
            // witness: a transverse line through the plus image, for the report
            Eigen::MatrixXd J = Eigen::MatrixXd::Zero(plus.ev_image->rows(), plus.ev_image->rows());
            for (Eigen::Index i = 0; i + 1 < J.rows(); i += 2) {
              J(i + 1, i) = 1;
              J(i, i + 1) = -1;
            }
            if (auto line = acyl::curves::sample_transverse_line(*plus.ev_image, J, seed))
              rep.details["transverse_line_example"] = acyl::curves::matrix_to_json(*line);
          }
        } else if (kind == "sl") {
          std::optional<std::pair<Eigen::MatrixXd, Eigen::MatrixXd>> pair;
          if (j.contains("boundary_images"))
            pair.emplace(acyl::curves::matrix_from_json(j.at("boundary_images").at(0)),
                         acyl::curves::matrix_from_json(j.at("boundary_images").at(1)));
          rep = acyl::curves::check_sl_gluing_hypothesis(acyl::curves::betti_from_json(j.at("plus")),
                                                         acyl::curves::betti_from_json(j.at("minus")),
                                                         j.value("matched", true), pair);
        } else {
          throw acyl::InvalidInput("hypothesis kind must be 'holo' or 'sl'");
        }
      } catch (const json::exception& e) {
        throw acyl::InvalidInput(input + ": " + e.what());
      }
      out.write(acyl::curves::to_json(rep));
      return rep.verdict ? kOk : kNegative;
    } else if (*catalog) {
      const auto c = acyl::catalog::load_catalog(catalog_file);
      for (const auto& w : c.warnings) std::cerr << "warning: " << w << "\n";
      if (examples) {
        json arr = json::array();
        bool ok = true;
        for (const auto& e : acyl::catalog::example_records()) {
          const auto rep = e.check();
          ok = ok && rep.verdict;
          auto j = acyl::catalog::to_json(e);
          j["verdict"] = rep.verdict;
          arr.push_back(j);
        }
        out.write(arr);
        return ok ? kOk : kNegative;
      }
      if (pairs) {
        const auto ps = acyl::catalog::enumerate_sphere_pairs(c);
        if (fmt == "csv") {
          std::string s = "line_family,very_ample_family\n";
          for (const auto& [p, q] : ps) s += p.label() + "," + q.label() + "\n";
          out.write(s);
        } else {
          json arr = json::array();
          for (const auto& [p, q] : ps) arr.push_back({{"line", acyl::catalog::to_json(p)}, {"very_ample", acyl::catalog::to_json(q)}});
          out.write(arr);
        }
        return kOk;
      }
      const auto recs = filter == "very-ample"        ? acyl::catalog::very_ample_families(c)
                        : filter == "line-candidates" ? acyl::catalog::line_candidates(c)
                                                      : c.records;
      if (fmt == "csv") {
        std::string s = "rank,number,index,very_ample,line_candidate\n";
        for (const auto& r : recs) s += acyl::catalog::to_csv_row(r) + "\n";
        out.write(s);
      } else {
        json arr = json::array();
        for (const auto& r : recs) arr.push_back(acyl::catalog::to_json(r));
        out.write(arr);
      }
    } else if (*glue) {
      auto p = acyl::gluer::ModelGluingProblem::preset(preset);
      p.lattice = lattice_from(glue_lattice, {}, {});
      p.mode_cutoff = mode_cutoff;
      const auto rep = acyl::gluer::glue_experiment(p, acyl::gluer::integer_grid(tmin, tmax));
      if (fmt == "csv") out.write(acyl::gluer::to_csv(rep));
      else out.write(acyl::gluer::to_json(rep));
      if (rep.error_fit) std::cerr << "error_norm exponent " << num(rep.error_fit->slope) << "\n";
    }
  } catch (const acyl::HypothesisViolated& e) {
    std::cerr << "hypothesis violated: " << e.what() << "\n";
    return kNegative;
  } catch (const acyl::Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kOk;
}
