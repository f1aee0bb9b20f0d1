#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pcomq/comq.hpp"
#include "pcomq/metrics.hpp"
#include "pcomq/permute.hpp"
#include "pcomq/simgen.hpp"
#include "pcomq/tensor_io.hpp"

namespace pcomq::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct QuantFlags {
  std::string method = "comq";
  int bits = 4;
  std::string granularity = "block";
  std::size_t block_size = 64;
  double lambda = 1.0;
  int iterations = 2;
  std::string perm = "percol";
  std::string row_key = "mean-abs";
  bool no_scale_update = false;
};

// The compare sweep takes lists for method and bits, so it skips both here.
void add_quant_flags(CLI::App& app, QuantFlags& f, bool single_cell) {
  if (single_cell) {
    app.add_option("--method", f.method, "rtn | comq | permcomq")->capture_default_str();
    app.add_option("--bits", f.bits, "2 | 4 | 8")->capture_default_str();
  }
  app.add_option("--granularity", f.granularity, "layer | channel | block")->capture_default_str();
  app.add_option("--block-size", f.block_size, "rows per block for --granularity block")
      ->capture_default_str();
  app.add_option("--lambda", f.lambda, "initial scale shrink in (0, 1]")->capture_default_str();
  app.add_option("--iters", f.iterations, "outer iterations K")->capture_default_str();
  app.add_option("--perm", f.perm, "joint | percol (permcomq only)")->capture_default_str();
  app.add_option("--row-key", f.row_key, "mean-abs | max-abs (joint permutation key)")
      ->capture_default_str();
  app.add_flag("--no-scale-update", f.no_scale_update, "keep the initial scales");
}

QuantConfig to_config(const QuantFlags& f) {
  QuantConfig cfg;
  const auto method = parse_method(f.method);
  if (!method) throw UsageError("unknown --method '" + f.method + "'");
  const auto gran = parse_granularity(f.granularity);
  if (!gran) throw UsageError("unknown --granularity '" + f.granularity + "'");
  const auto perm = parse_permutation(f.perm);
  if (!perm) throw UsageError("unknown --perm '" + f.perm + "'");
  const auto key = parse_row_key(f.row_key);
  if (!key) throw UsageError("unknown --row-key '" + f.row_key + "'");
  cfg.method = *method;
  cfg.bits = f.bits;
  cfg.granularity = Granularity{*gran, f.block_size};
  cfg.lambda = f.lambda;
  cfg.iterations = f.iterations;
  cfg.permutation = *perm;
  cfg.row_key = *key;
  cfg.scale_update = !f.no_scale_update;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

json config_json(const QuantConfig& cfg) {
  return {{"method", to_string(cfg.method)},
          {"bits", cfg.bits},
          {"lambda", cfg.lambda},
          {"iterations", cfg.iterations},
          {"granularity", to_string(cfg.granularity.kind)},
          {"block_size", cfg.granularity.block_size},
          {"permutation", to_string(cfg.permutation)},
          {"row_key", to_string(cfg.row_key)},
          {"scale_update", cfg.scale_update},
          {"epsilon_rel", cfg.epsilon_rel}};
}

json weight_params_json(const SimWeightParams& p) {
  return {{"m", p.m},
          {"n", p.n},
          {"base_sigma", p.base_sigma},
          {"row_scale_sigma", p.row_scale_sigma},
          {"col_scale_sigma", p.col_scale_sigma},
          {"outlier_fraction", p.outlier_fraction},
          {"outlier_range", {p.outlier_low, p.outlier_high}},
          {"seed", p.seed}};
}

json calib_params_json(const SimCalibParams& p) {
  return {{"samples", p.samples},
          {"features", p.features},
          {"mix_epsilon", p.mix_epsilon},
          {"seed", p.seed}};
}

json manifest_base(const std::string& command) {
  return {{"tool", "pcomq"}, {"version", kToolVersion}, {"command", command}};
}

void write_manifest(const fs::path& dir, const json& manifest) {
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

void ensure_dir(const fs::path& dir) {
  if (dir.empty()) throw UsageError("--out-dir must not be empty");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw TensorIoError(TensorErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
}

// "3,6" -> {3, 6}
std::pair<double, double> parse_range(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("range must look like LOW,HIGH");
  auto parse = [&](std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw UsageError("not a number in range '" + text + "'");
    }
    return v;
  };
  const std::string_view all(text);
  return {parse(all.substr(0, comma)), parse(all.substr(comma + 1))};
}

std::uint64_t parse_u64(std::string_view s, const std::string& context) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw UsageError("bad integer '" + std::string(s) + "' in " + context);
  }
  return v;
}

// "1..10" or "1,4,9" (items may themselves be ranges).
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    if (const auto dots = item.find(".."); dots != std::string_view::npos) {
      const auto lo = parse_u64(item.substr(0, dots), text);
      const auto hi = parse_u64(item.substr(dots + 2), text);
      if (hi < lo) throw UsageError("descending seed range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(parse_u64(item, text));
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  if (out.empty()) throw UsageError("empty seed list");
  return out;
}

struct SimFlags {
  SimWeightParams weights;
  SimCalibParams calib;
  std::string outlier_range = "3,6";
};

void add_sim_flags(CLI::App& app, SimFlags& f, bool with_seed) {
  app.add_option("--m", f.weights.m, "weight rows (= calibration features)")->capture_default_str();
  app.add_option("--n", f.weights.n, "weight columns")->capture_default_str();
  app.add_option("--samples", f.calib.samples, "calibration samples")->capture_default_str();
  if (with_seed) app.add_option("--seed", f.weights.seed, "generator seed")->capture_default_str();
  app.add_option("--base-sigma", f.weights.base_sigma)->capture_default_str();
  app.add_option("--row-sigma", f.weights.row_scale_sigma)->capture_default_str();
  app.add_option("--col-sigma", f.weights.col_scale_sigma)->capture_default_str();
  app.add_option("--outlier-frac", f.weights.outlier_fraction, "fraction of entries in [0, 1)")
      ->capture_default_str();
  app.add_option("--outlier-range", f.outlier_range, "LOW,HIGH outlier magnitudes")
      ->capture_default_str();
  app.add_option("--mix-eps", f.calib.mix_epsilon, "calibration mixing strength")
      ->capture_default_str();
}

void finalize_sim(SimFlags& f) {
  const auto [lo, hi] = parse_range(f.outlier_range);
  f.weights.outlier_low = lo;
  f.weights.outlier_high = hi;
  f.calib.features = f.weights.m;
  f.calib.seed = f.weights.seed;
  try {
    f.weights.validate();
    f.calib.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(SimFlags& f, const std::string& out_dir, std::ostream& out) {
  finalize_sim(f);
  const fs::path dir(out_dir);
  ensure_dir(dir);
  const Matrix w = gen_weights(f.weights);
  const Matrix x = gen_calibration(f.calib);
  write_tensor(dir / "weights.pqt", w);
  write_tensor(dir / "calib.pqt", x);
  json manifest = manifest_base("simulate");
  manifest["sim_weights"] = weight_params_json(f.weights);
  manifest["sim_calib"] = calib_params_json(f.calib);
  manifest["outputs"] = {{"weights", "weights.pqt"}, {"calib", "calib.pqt"}};
  write_manifest(dir, manifest);
  out << "wrote " << (dir / "weights.pqt").string() << " (" << w.rows() << "x" << w.cols()
      << ") and " << (dir / "calib.pqt").string() << " (" << x.rows() << "x" << x.cols() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- quantize

CsvTable params_table(const QuantResult& r) {
  CsvTable t;
  t.header = {"unit", "row_begin", "row_end", "col_begin", "col_end", "delta",
              "zero_point", "bits", "degenerate", "constant"};
  for (std::size_t u = 0; u < r.params.size(); ++u) {
    const auto& d = r.layout.unit(u);
    const auto& p = r.params[u];
    t.rows.push_back({std::to_string(u), std::to_string(d.row_begin), std::to_string(d.row_end),
                      std::to_string(d.col_begin), std::to_string(d.col_end), format_real(p.delta),
                      std::to_string(p.zero_point), std::to_string(p.bits),
                      p.degenerate() ? "1" : "0", format_real(p.constant)});
  }
  return t;
}

CsvTable trace_table(const QuantResult& r) {
  CsvTable t;
  t.header = {"event", "kind", "iteration", "row", "loss", "feasible"};
  for (std::size_t e = 0; e < r.loss_trace.size(); ++e) {
    const auto& ev = r.loss_trace[e];
    const bool row = ev.kind == LossEvent::Kind::RowUpdate;
    t.rows.push_back({std::to_string(e), row ? "row" : "scale", std::to_string(ev.iteration),
                      row ? std::to_string(ev.row) : "", format_real(ev.loss),
                      e >= r.first_feasible_event ? "1" : "0"});
  }
  return t;
}

CsvTable plan_table(const PermutationPlan& plan) {
  CsvTable t;
  t.header = {"column", "position", "source_row"};
  for (std::size_t c = 0; c < plan.forward.size(); ++c) {
    const std::string column =
        plan.strategy == PermutationStrategy::PerColumn ? std::to_string(c) : "all";
    for (std::size_t p = 0; p < plan.forward[c].size(); ++p) {
      t.rows.push_back({column, std::to_string(p), std::to_string(plan.forward[c][p])});
    }
  }
  return t;
}

Matrix codes_as_matrix(const CodeMatrix& codes) {
  Matrix m(codes.rows(), codes.cols());
  for (std::size_t i = 0; i < codes.rows(); ++i) {
    for (std::size_t j = 0; j < codes.cols(); ++j) m(i, j) = static_cast<double>(codes(i, j));
  }
  return m;
}

int cmd_quantize(const QuantFlags& f, const std::string& weights_path,
                 const std::string& calib_path, const std::string& out_dir, std::ostream& out) {
  const QuantConfig cfg = to_config(f);
  if (cfg.method != Method::RTN && calib_path.empty()) {
    throw UsageError("--calib is required for --method " + std::string(to_string(cfg.method)));
  }
  const fs::path dir(out_dir);
  ensure_dir(dir);
  const Matrix w = read_tensor(weights_path);
  const Matrix x = calib_path.empty() ? Matrix() : read_tensor(calib_path);
  if (!calib_path.empty() && x.cols() != w.rows()) {
    throw ShapeError("calibration has " + std::to_string(x.cols()) + " features but weights have " +
                     std::to_string(w.rows()) + " rows");
  }
  const QuantResult r = quantize(w, x, cfg);

  write_tensor(dir / "quantized.pqt", r.w_q);
  write_tensor(dir / "codes.pqt", codes_as_matrix(r.codes));
  write_csv(dir / "params.csv", params_table(r));
  write_csv(dir / "loss_trace.csv", trace_table(r));
  json outputs = {{"quantized", "quantized.pqt"},
                  {"codes", "codes.pqt"},
                  {"params", "params.csv"},
                  {"loss_trace", "loss_trace.csv"}};
  if (r.plan) {
    write_csv(dir / "plan.csv", plan_table(*r.plan));
    outputs["plan"] = "plan.csv";
  }
  json manifest = manifest_base("quantize");
  manifest["config"] = config_json(cfg);
  manifest["inputs"] = {{"weights", weights_path}, {"calib", calib_path}};
  manifest["outputs"] = outputs;
  write_manifest(dir, manifest);

  out << to_string(cfg.method) << " " << cfg.bits << "-bit: wrote " << (dir / "quantized.pqt").string();
  if (!x.empty()) out << ", proxy loss " << format_real(proxy_loss(w, r.w_q, x));
  out << "\n";
  return kExitOk;
}

// -------------------------------------------------------------------- eval

void emit(const std::string& path, const CsvTable& table, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << format_csv(table);
  } else {
    write_csv(path, table);
  }
}

int cmd_eval(const std::string& weights_path, const std::string& quantized_path,
             const std::string& calib_path, std::size_t bins, double eps, const std::string& out_path,
             std::ostream& out) {
  if (bins < 1) throw UsageError("--bins must be at least 1");
  if (!(eps > 0.0)) throw UsageError("--eps must be positive");
  const Matrix w = read_tensor(weights_path);
  const Matrix w_q = read_tensor(quantized_path);
  const Matrix x = read_tensor(calib_path);
  if (w.rows() != w_q.rows() || w.cols() != w_q.cols()) {
    throw ShapeError("quantized tensor shape differs from weights");
  }
  if (x.cols() != w.rows()) throw ShapeError("calibration features do not match weight rows");
  QuantConfig cfg;
  cfg.epsilon_rel = eps;
  emit(out_path, error_report_table(summarize(w, w_q, x, cfg, bins)), out);
  return kExitOk;
}

// ----------------------------------------------------------------- compare

struct CompareFlags {
  std::string seeds = "1..10";
  std::string bits = "2,4,8";
  std::string methods = "rtn,comq,permcomq";
  std::size_t bins = 16;
  std::string out = "-";
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

int cmd_compare(const CompareFlags& cf, QuantFlags qf, SimFlags& sf, std::ostream& out) {
  finalize_sim(sf);
  const auto seeds = parse_seed_list(cf.seeds);
  std::vector<int> bit_list;
  for (const auto& b : split_list(cf.bits)) bit_list.push_back(static_cast<int>(parse_u64(b, cf.bits)));
  std::vector<Method> methods;
  for (const auto& m : split_list(cf.methods)) {
    const auto parsed = parse_method(m);
    if (!parsed) throw UsageError("unknown method '" + m + "' in --methods");
    methods.push_back(*parsed);
  }
  if (bit_list.empty() || methods.empty()) throw UsageError("empty --bits or --methods");
  if (cf.bins < 1) throw UsageError("--bins must be at least 1");
  // Validate every cell's config before doing any work.
  std::vector<QuantConfig> configs;
  for (int bits : bit_list) {
    for (Method method : methods) {
      qf.bits = bits;
      qf.method = std::string(to_string(method));
      configs.push_back(to_config(qf));
    }
  }

  CsvTable t;
  t.header = {"row_kind", "method", "bits",         "seed",       "bin_lo",
              "bin_hi",   "count",  "mean_rel_err", "proxy_loss", "low_quartile_rel_err"};
  // (bits, method index) -> sums over seeds
  std::map<std::pair<int, std::size_t>, std::pair<double, double>> totals;

  for (std::size_t c = 0; c < configs.size(); ++c) {
    const QuantConfig& cfg = configs[c];
    const std::size_t method_index = c % methods.size();
    for (const std::uint64_t seed : seeds) {
      SimWeightParams wp = sf.weights;
      SimCalibParams cp = sf.calib;
      wp.seed = seed;
      cp.seed = seed;
      const Matrix w = gen_weights(wp);
      const Matrix x = gen_calibration(cp);
      const QuantResult r = quantize(w, x, cfg);
      const ErrorReport report = summarize(w, r.w_q, x, cfg, cf.bins);
      const double low_q = quantile_relative_error(w, r.w_q, 0.0, 0.25, cfg.epsilon_rel);
      const std::string method(to_string(cfg.method));
      const std::string bits = std::to_string(cfg.bits);
      const std::string seed_text = std::to_string(seed);
      for (const auto& bin : report.bins) {
        t.rows.push_back({"bin", method, bits, seed_text, format_real(bin.lo), format_real(bin.hi),
                          std::to_string(bin.count),
                          bin.mean_rel_err ? format_real(*bin.mean_rel_err) : "nan", "", ""});
      }
      t.rows.push_back({"cell", method, bits, seed_text, "", "", std::to_string(w.size()), "",
                        format_real(report.proxy_loss), format_real(low_q)});
      auto& acc = totals[{cfg.bits, method_index}];
      acc.first += report.proxy_loss;
      acc.second += low_q;
    }
  }
  for (const auto& [key, sums] : totals) {
    const double count = static_cast<double>(seeds.size());
    t.rows.push_back({"summary", std::string(to_string(methods[key.second])),
                      std::to_string(key.first), "", "", "", "", "",
                      format_real(sums.first / count), format_real(sums.second / count)});
  }

  emit(cf.out, t, out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Post-training weight quantization: RTN, COMQ and permutation-COMQ", "pcomq"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("pcomq ") + kToolVersion);

  SimFlags sim_flags;
  std::string sim_out;
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic weights and calibration data");
  add_sim_flags(*simulate, sim_flags, true);
  simulate->add_option("--out-dir", sim_out, "output directory")->required();

  QuantFlags quant_flags;
  std::string weights_path, calib_path, quant_out;
  auto* quant = app.add_subcommand("quantize", "Quantize one weight tensor");
  add_quant_flags(*quant, quant_flags, true);
  quant->add_option("--weights", weights_path, "weight tensor file")->required();
  quant->add_option("--calib", calib_path, "calibration tensor file");
  quant->add_option("--out-dir", quant_out, "output directory")->required();

  std::string eval_weights, eval_quantized, eval_calib, eval_out = "-";
  std::size_t eval_bins = 16;
  double eval_eps = 1e-8;
  auto* eval = app.add_subcommand("eval", "Binned relative error and proxy loss of a quantized tensor");
  eval->add_option("--weights", eval_weights, "original weight tensor")->required();
  eval->add_option("--quantized", eval_quantized, "quantized weight tensor")->required();
  eval->add_option("--calib", eval_calib, "calibration tensor")->required();
  eval->add_option("--bins", eval_bins, "number of log-spaced magnitude bins")->capture_default_str();
  eval->add_option("--eps", eval_eps, "relative error denominator guard")->capture_default_str();
  eval->add_option("--out", eval_out, "CSV path, - for stdout")->capture_default_str();

  CompareFlags cmp_flags;
  QuantFlags cmp_quant;
  cmp_quant.block_size = 16;
  SimFlags cmp_sim;
  auto* compare = app.add_subcommand("compare", "Sweep methods x bits x seeds on synthetic layers");
  add_quant_flags(*compare, cmp_quant, false);
  add_sim_flags(*compare, cmp_sim, false);
  compare->add_option("--seeds", cmp_flags.seeds, "seed list, e.g. 1..10 or 1,2,5")
      ->capture_default_str();
  compare->add_option("--bits", cmp_flags.bits, "comma-separated bit widths")
      ->capture_default_str();
  compare->add_option("--methods", cmp_flags.methods, "comma-separated methods")
      ->capture_default_str();
  compare->add_option("--bins", cmp_flags.bins, "log-spaced magnitude bins")->capture_default_str();
  compare->add_option("--out", cmp_flags.out, "CSV path, - for stdout")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << e.what() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "pcomq: " << e.what() << "\n";
    return kExitUsageError;
  }

  try {
    if (*simulate) return cmd_simulate(sim_flags, sim_out, out);
    if (*quant) return cmd_quantize(quant_flags, weights_path, calib_path, quant_out, out);
    if (*eval) {
      return cmd_eval(eval_weights, eval_quantized, eval_calib, eval_bins, eval_eps, eval_out, out);
    }
    if (*compare) return cmd_compare(cmp_flags, cmp_quant, cmp_sim, out);
  } catch (const UsageError& e) {
    err << "pcomq: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    err << "pcomq: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsageError;
}

}  // namespace pcomq::cli
