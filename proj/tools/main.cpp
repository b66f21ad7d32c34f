// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quantprune/errors.hpp"
#include "quantprune/evaluate.hpp"
#include "quantprune/npy.hpp"
#include "quantprune/prune.hpp"
#include "quantprune/report.hpp"
#include "quantprune/run_config.hpp"
#include "quantprune/sensitivity.hpp"
#include "quantprune/synth.hpp"
#include "quantprune/version.hpp"

namespace qp = quantprune;

namespace {

using Json = nlohmann::ordered_json;

// Flag > config file > built-in default.
template <typename T>
T pick(const CLI::Option* opt, const T& flag_value,
       const std::optional<T>& file_value, const T& fallback) {
  if (opt != nullptr && opt->count() > 0) return flag_value;
  if (file_value) return *file_value;
  return fallback;
}

struct QuantFlags {
  int bits = 4;
  int group_size = 128;
  double epsilon = 1e-8;
  std::string scheme = "symmetric";
  std::string rounding = "half_away_from_zero";
  double clip_percentile = 99.0;

  CLI::Option* bits_opt = nullptr;
  CLI::Option* group_opt = nullptr;
  CLI::Option* eps_opt = nullptr;
  CLI::Option* scheme_opt = nullptr;
  CLI::Option* round_opt = nullptr;
  CLI::Option* clip_opt = nullptr;

  void attach(CLI::App* cmd) {
    bits_opt = cmd->add_option("--bits", bits, "Quantization bit-width");
    group_opt =
        cmd->add_option("--group-size", group_size, "Channels per group");
    eps_opt = cmd->add_option("--epsilon", epsilon,
                              "Divide-by-zero guard for the symmetric path");
    scheme_opt = cmd->add_option("--scheme", scheme,
                                 "asymmetric or symmetric (scoring scheme)");
    round_opt = cmd->add_option("--rounding", rounding,
                                "half_away_from_zero or half_to_even");
    clip_opt = cmd->add_option("--clip-percentile", clip_percentile,
                               "Percentile for the clip_absmax metric");
  }

  qp::QuantConfig resolve(const qp::RunConfigFile& file) const {
    qp::QuantConfig cfg;
    cfg.bits = pick(bits_opt, bits, file.bits, 4);
    cfg.group_size = pick(group_opt, group_size, file.group_size, 128);
    cfg.epsilon = pick(eps_opt, epsilon, file.epsilon, 1e-8);
    cfg.scheme = qp::scheme_from_string(
        pick(scheme_opt, scheme, file.scheme, std::string("symmetric")));
    cfg.rounding = qp::rounding_from_string(pick(
        round_opt, rounding, file.rounding, std::string("half_away_from_zero")));
    cfg.clip_percentile =
        pick(clip_opt, clip_percentile, file.clip_percentile, 99.0);
    cfg.validate();
    return cfg;
  }
};

struct PruneFlags {
  double alpha = 0.5;
  std::string keep;
  std::string metric = "combine";

  CLI::Option* alpha_opt = nullptr;
  CLI::Option* keep_opt = nullptr;
  CLI::Option* metric_opt = nullptr;

  void attach(CLI::App* cmd, bool with_keep = true) {
    alpha_opt = cmd->add_option("--alpha", alpha, "Semantic weight in [0, 1]");
    if (with_keep) {
      keep_opt = cmd->add_option(
          "--keep", keep, "Tokens to retain: a count or ratio:<r> form");
    }
    metric_opt =
        cmd->add_option("--metric", metric, "Sensitivity metric identifier");
  }

  qp::PruneConfig resolve(const qp::RunConfigFile& file,
                          const QuantFlags& quant, std::size_t n_tokens) const {
    qp::PruneConfig cfg;
    cfg.alpha = pick(alpha_opt, alpha, file.alpha, 0.5);
    cfg.metric = qp::metric_from_string(
        pick(metric_opt, metric, file.metric, std::string("combine")));
    cfg.quant = quant.resolve(file);
    std::string keep_text = pick(keep_opt, keep, file.keep, std::string());
    if (keep_text.empty()) {
      throw qp::ConfigError("keep is required: pass --keep or set it in the "
                            "config file");
    }
    cfg.keep = qp::resolve_keep(keep_text, n_tokens);
    cfg.validate();
    return cfg;
  }
};

struct SynthFlags {
  std::size_t n_tokens = 256;
  std::size_t dim = 1024;
  double base_scale = 1.0;
  std::size_t n_outliers = 4;
  double magnitude = 20.0;
  std::size_t channels = 32;

  CLI::Option* n_tokens_opt = nullptr;
  CLI::Option* dim_opt = nullptr;
  CLI::Option* scale_opt = nullptr;
  CLI::Option* outliers_opt = nullptr;
  CLI::Option* magnitude_opt = nullptr;
  CLI::Option* channels_opt = nullptr;

  void attach(CLI::App* cmd) {
    n_tokens_opt = cmd->add_option("--n-tokens", n_tokens, "Token count");
    dim_opt = cmd->add_option("--dim", dim, "Channels per token");
    scale_opt = cmd->add_option("--base-scale", base_scale,
                                "Background activation std");
    outliers_opt =
        cmd->add_option("--n-outlier-tokens", n_outliers, "Injected tokens");
    magnitude_opt = cmd->add_option("--outlier-magnitude", magnitude,
                                    "Spike amplitude multiplier");
    channels_opt = cmd->add_option("--outlier-channels", channels,
                                   "Spiked channels per outlier token");
  }

  qp::SyntheticSpec resolve(const qp::RunConfigFile& file,
                            const CLI::Option* seed_opt, std::uint64_t seed,
                            std::uint64_t fallback_seed) const {
    qp::SyntheticSpec spec;
    spec.n_tokens = pick(n_tokens_opt, n_tokens, file.n_tokens,
                         std::size_t{256});
    spec.dim = pick(dim_opt, dim, file.dim, std::size_t{1024});
    spec.base_scale = pick(scale_opt, base_scale, file.base_scale, 1.0);
    spec.n_outlier_tokens =
        pick(outliers_opt, n_outliers, file.n_outlier_tokens, std::size_t{4});
    spec.outlier_magnitude =
        pick(magnitude_opt, magnitude, file.outlier_magnitude, 20.0);
    spec.outlier_channels_per_token = pick(
        channels_opt, channels, file.outlier_channels_per_token,
        std::size_t{32});
    spec.seed = pick(seed_opt, seed, file.seed, fallback_seed);
    spec.validate();
    return spec;
  }
};

// --config beats the optional QUANTPRUNE_CONFIG environment default.
qp::RunConfigFile load_config_if_given(const std::string& path) {
  if (!path.empty()) return qp::load_run_config(path);
  const char* env = std::getenv("QUANTPRUNE_CONFIG");
  if (env != nullptr && env[0] != '\0') return qp::load_run_config(env);
  return {};
}

qp::InputRecord record_for(const std::string& role, const std::string& path,
                           const qp::Tensor& tensor) {
  return qp::InputRecord{role, path, qp::digest_file(path), tensor.shape};
}

qp::TokenMatrix load_tokens(const std::string& path, qp::InputManifest& inputs) {
  qp::Tensor tensor = qp::read_tensor(path);
  if (tensor.shape.size() != 2) {
    throw qp::FormatError(path + ": token matrix must be 2-D");
  }
  inputs.push_back(record_for("tokens", path, tensor));
  return qp::make_token_matrix(qp::tensor_to_matrix(tensor));
}

// Built-in S^P source when no external score file is supplied: cosine
// against a Gaussian-like query drawn from --query-seed.
qp::ScoreVector semantic_from_options(const qp::TokenMatrix& tokens,
                                      const std::string& semantic_path,
                                      const CLI::Option* query_seed_opt,
                                      std::uint64_t query_seed,
                                      qp::InputManifest& inputs) {
  if (!semantic_path.empty()) {
    qp::Tensor tensor = qp::read_tensor(semantic_path);
    if (!tensor.is_vector()) {
      throw qp::FormatError(semantic_path + ": semantic scores must be 1-D");
    }
    inputs.push_back(record_for("semantic", semantic_path, tensor));
    return qp::load_external_semantic_scores(tensor.values, tokens.count());
  }
  if (query_seed_opt == nullptr || query_seed_opt->count() == 0) {
    throw qp::ConfigError("provide --semantic <file> or --query-seed <n>");
  }
  qp::PortableRng rng(query_seed);
  std::vector<double> query(tokens.dim());
  for (double& q : query) q = qp::snap_to_f32(rng.gaussian_like());
  return qp::semantic_score_cosine(tokens, query);
}

qp::Matrix load_weights(const std::string& path, qp::InputManifest& inputs) {
  qp::Tensor tensor = qp::read_tensor(path);
  if (tensor.shape.size() != 2) {
    throw qp::FormatError(path + ": weights must be 2-D");
  }
  inputs.push_back(record_for("weights", path, tensor));
  return qp::tensor_to_matrix(tensor);
}

bool ends_with(const std::string& text, std::string_view suffix) {
  return text.size() >= suffix.size() &&
         text.compare(text.size() - suffix.size(), suffix.size(), suffix) == 0;
}

Json inputs_to_json(const qp::InputManifest& inputs) {
  Json j = Json::object();
  for (const auto& record : inputs) {
    Json entry;
    entry["path"] = record.path;
    entry["digest"] = record.digest;
    entry["shape"] = record.shape;
    j[record.role] = entry;
  }
  return j;
}

Json quant_to_json(const qp::QuantConfig& cfg) {
  Json j;
  j["bits"] = cfg.bits;
  j["group_size"] = cfg.group_size;
  j["scheme"] = qp::to_string(cfg.scheme);
  j["epsilon"] = cfg.epsilon;
  j["rounding"] = qp::to_string(cfg.rounding);
  j["clip_percentile"] = cfg.clip_percentile;
  return j;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Quantization-aware visual token scoring and pruning"};
  app.set_version_flag("--version", qp::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  auto attach_config = [&config_path](CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "JSON run config (defaults < file < flags)");
  };

  // ---- score ----------------------------------------------------------
  auto* score = app.add_subcommand("score", "Compute per-token metric scores");
  attach_config(score);
  std::string score_tokens, score_out, score_format = "json";
  QuantFlags score_quant;
  std::string score_metric = "combine";
  score->add_option("--tokens", score_tokens, "Token matrix (.npy)")
      ->required();
  auto* score_metric_opt =
      score->add_option("--metric", score_metric, "Metric identifier");
  score_quant.attach(score);
  score->add_option("--out", score_out, "Output path (.npy or report)")
      ->required();
  score->add_option("--format", score_format, "json or csv");

  // ---- prune ----------------------------------------------------------
  auto* prune_cmd = app.add_subcommand("prune", "Fuse scores and select top-K");
  attach_config(prune_cmd);
  std::string prune_tokens, prune_semantic, prune_out, prune_format = "json";
  std::uint64_t prune_query_seed = 0;
  QuantFlags prune_quant;
  PruneFlags prune_flags;
  prune_cmd->add_option("--tokens", prune_tokens, "Token matrix (.npy)")
      ->required();
  auto* prune_sem = prune_cmd->add_option(
      "--semantic", prune_semantic, "External semantic score vector (.npy)");
  auto* prune_qseed = prune_cmd->add_option(
      "--query-seed", prune_query_seed, "Seed for the built-in cosine query");
  prune_sem->excludes(prune_qseed);
  prune_flags.attach(prune_cmd);
  prune_quant.attach(prune_cmd);
  prune_cmd->add_option("--out", prune_out, "Report path")->required();
  prune_cmd->add_option("--format", prune_format, "json or csv");

  // ---- simulate -------------------------------------------------------
  auto* sim = app.add_subcommand("simulate",
                                 "Fake-quantize tokens and report stats");
  attach_config(sim);
  std::string sim_tokens, sim_out, sim_format = "json";
  QuantFlags sim_quant;
  sim->add_option("--tokens", sim_tokens, "Token matrix (.npy)")->required();
  sim_quant.attach(sim);
  sim->add_option("--out", sim_out, "Report path")->required();
  sim->add_option("--format", sim_format, "json or csv");

  // ---- synth ----------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "Generate a synthetic instance");
  attach_config(synth);
  std::string synth_out, synth_weights_out, synth_semantic_out;
  std::uint64_t synth_seed = 1;
  SynthFlags synth_flags;
  synth->add_option("--out", synth_out, "Token matrix output (.npy)")
      ->required();
  synth->add_option("--weights", synth_weights_out,
                    "Also write the instance weight matrix here (.npy)");
  synth->add_option("--semantic", synth_semantic_out,
                    "Also write the instance cosine S^P here (.npy)");
  auto* synth_seed_opt =
      synth->add_option("--seed", synth_seed, "Generator seed");
  synth_flags.attach(synth);

  // ---- compare --------------------------------------------------------
  auto* compare = app.add_subcommand(
      "compare", "Strategy sweep: semantic-only / quant-only / fused");
  attach_config(compare);
  std::string cmp_tokens, cmp_semantic, cmp_weights, cmp_out,
      cmp_format = "json", cmp_injected;
  std::uint64_t cmp_query_seed = 0, cmp_seed = 0;
  std::vector<double> cmp_alphas;
  std::string cmp_keep;
  QuantFlags cmp_quant;
  std::string cmp_metric = "combine";
  compare->add_option("--tokens", cmp_tokens, "Token matrix (.npy)")
      ->required();
  auto* cmp_sem = compare->add_option(
      "--semantic", cmp_semantic, "External semantic score vector (.npy)");
  auto* cmp_qseed = compare->add_option("--query-seed", cmp_query_seed,
                                        "Seed for the built-in cosine query");
  cmp_sem->excludes(cmp_qseed);
  compare->add_option("--weights", cmp_weights, "Weight matrix (.npy)")
      ->required();
  compare->add_option("--alpha", cmp_alphas,
                      "Fusion weights to sweep (repeatable)");
  auto* cmp_keep_opt =
      compare->add_option("--keep", cmp_keep, "Count or ratio:<r>");
  auto* cmp_metric_opt =
      compare->add_option("--metric", cmp_metric, "Sensitivity metric");
  cmp_quant.attach(compare);
  auto* cmp_seed_opt =
      compare->add_option("--seed", cmp_seed, "Seed echoed into the report");
  compare->add_option("--injected", cmp_injected,
                      "Comma-separated injected outlier token indices");
  compare->add_option("--out", cmp_out, "Report path")->required();
  compare->add_option("--format", cmp_format, "json or csv");

  // ---- ablate ---------------------------------------------------------
  auto* ablate = app.add_subcommand("ablate", "Run all nine metric variants");
  attach_config(ablate);
  std::string abl_tokens, abl_semantic, abl_weights, abl_out,
      abl_format = "json", abl_injected;
  std::uint64_t abl_query_seed = 0, abl_seed = 0;
  QuantFlags abl_quant;
  PruneFlags abl_flags;
  ablate->add_option("--tokens", abl_tokens, "Token matrix (.npy)")
      ->required();
  auto* abl_sem = ablate->add_option(
      "--semantic", abl_semantic, "External semantic score vector (.npy)");
  auto* abl_qseed = ablate->add_option("--query-seed", abl_query_seed,
                                       "Seed for the built-in cosine query");
  abl_sem->excludes(abl_qseed);
  ablate->add_option("--weights", abl_weights, "Weight matrix (.npy)")
      ->required();
  abl_flags.attach(ablate);
  abl_quant.attach(ablate);
  auto* abl_seed_opt =
      ablate->add_option("--seed", abl_seed, "Seed echoed into the report");
  ablate->add_option("--injected", abl_injected,
                     "Comma-separated injected outlier token indices");
  ablate->add_option("--out", abl_out, "Report path")->required();
  ablate->add_option("--format", abl_format, "json or csv");

  // ---- heatmap --------------------------------------------------------
  auto* heatmap = app.add_subcommand("heatmap", "Export scores as a CSV grid");
  attach_config(heatmap);
  std::string hm_tokens, hm_scores, hm_out, hm_metric = "combine";
  std::size_t hm_rows = 0, hm_cols = 0;
  bool hm_normalized = false;
  QuantFlags hm_quant;
  auto* hm_tokens_opt = heatmap->add_option(
      "--tokens", hm_tokens,
      "Token matrix (.npy); scores are computed via --metric");
  auto* hm_scores_opt = heatmap->add_option(
      "--scores", hm_scores, "Pre-computed score vector (.npy)");
  hm_tokens_opt->excludes(hm_scores_opt);
  auto* hm_metric_opt =
      heatmap->add_option("--metric", hm_metric, "Metric identifier");
  hm_quant.attach(heatmap);
  heatmap->add_option("--rows", hm_rows, "Grid rows (default: square)");
  heatmap->add_option("--cols", hm_cols, "Grid cols (default: square)");
  heatmap->add_flag("--normalized", hm_normalized,
                    "Min-max normalize before export");
  heatmap->add_option("--out", hm_out, "Grid CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return 0;
    }
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return qp::exit_code_for(qp::ErrorCategory::configuration);
  }

  const qp::RunConfigFile file_cfg = load_config_if_given(config_path);

  if (score->parsed()) {
    qp::InputManifest inputs;
    qp::TokenMatrix tokens = load_tokens(score_tokens, inputs);
    qp::QuantConfig quant = score_quant.resolve(file_cfg);
    qp::MetricId metric = qp::metric_from_string(
        pick(score_metric_opt, score_metric, file_cfg.metric,
             std::string("combine")));
    qp::ScoreVector scores = qp::metric_score(tokens, metric, quant);
    if (ends_with(score_out, ".npy")) {
      qp::write_tensor(scores.values, score_out);
      return 0;
    }
    if (qp::report_format_from_string(score_format) == qp::ReportFormat::csv) {
      std::string out = "token,score\n";
      for (std::size_t i = 0; i < scores.values.size(); ++i) {
        out += std::to_string(i) + ',' +
               Json(scores.values[i]).dump() + '\n';
      }
      qp::write_text_atomic(score_out, out);
      return 0;
    }
    Json j;
    j["version"] = qp::kVersion;
    Json config;
    config["metric"] = qp::to_string(metric);
    config["quant"] = quant_to_json(quant);
    j["config"] = config;
    j["inputs"] = inputs_to_json(inputs);
    Json s;
    s["metric"] = qp::to_string(metric);
    s["normalized"] = scores.normalized;
    s["values"] = scores.values;
    j["scores"] = s;
    qp::write_text_atomic(score_out, j.dump(2) + "\n");
    return 0;
  }

  if (prune_cmd->parsed()) {
    qp::InputManifest inputs;
    qp::TokenMatrix tokens = load_tokens(prune_tokens, inputs);
    qp::ScoreVector sp = semantic_from_options(
        tokens, prune_semantic, prune_qseed, prune_query_seed, inputs);
    qp::PruneConfig cfg =
        prune_flags.resolve(file_cfg, prune_quant, tokens.count());
    qp::PruneResult result = qp::prune(tokens, sp, cfg);
    if (result.keep_clamped) {
      std::cerr << "warning: keep " << result.k_requested
                << " exceeds token count " << tokens.count()
                << "; selection clamped\n";
    }
    qp::emit_report(result, inputs, prune_out,
                    qp::report_format_from_string(prune_format));
    return 0;
  }

  if (sim->parsed()) {
    qp::InputManifest inputs;
    qp::TokenMatrix tokens = load_tokens(sim_tokens, inputs);
    qp::QuantConfig quant = sim_quant.resolve(file_cfg);
    qp::FakeQuantResult fq = qp::fake_quantize_rows(tokens.data, quant);
    std::vector<double> per_token(tokens.count());
    double num = 0.0, den = 0.0, max_resid = 0.0;
    for (std::size_t i = 0; i < tokens.count(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < tokens.dim(); ++j) {
        double r = tokens.data(i, j) - fq.reconstructed(i, j);
        sum += r * r;
        max_resid = std::max(max_resid, std::fabs(r));
        den += tokens.data(i, j) * tokens.data(i, j);
      }
      per_token[i] = std::sqrt(sum);
      num += sum;
    }
    if (qp::report_format_from_string(sim_format) == qp::ReportFormat::csv) {
      std::string out = "token,residual_l2\n";
      for (std::size_t i = 0; i < per_token.size(); ++i) {
        out += std::to_string(i) + ',' + Json(per_token[i]).dump() + '\n';
      }
      qp::write_text_atomic(sim_out, out);
      return 0;
    }
    Json j;
    j["version"] = qp::kVersion;
    Json config;
    config["quant"] = quant_to_json(quant);
    j["config"] = config;
    j["inputs"] = inputs_to_json(inputs);
    Json stats;
    stats["n_tokens"] = tokens.count();
    stats["dim"] = tokens.dim();
    stats["num_groups"] = fq.partition.num_groups;
    stats["relative_error_fro"] =
        den == 0.0 ? 0.0 : std::sqrt(num) / std::sqrt(den);
    stats["max_abs_residual"] = max_resid;
    j["stats"] = stats;
    j["per_token_error"] = per_token;
    qp::write_text_atomic(sim_out, j.dump(2) + "\n");
    return 0;
  }

  if (synth->parsed()) {
    qp::SyntheticSpec spec =
        synth_flags.resolve(file_cfg, synth_seed_opt, synth_seed, 1);
    Json summary;
    summary["seed"] = spec.seed;
    summary["n_tokens"] = spec.n_tokens;
    summary["dim"] = spec.dim;
    if (!synth_weights_out.empty() || !synth_semantic_out.empty()) {
      qp::CorpusInstance instance = qp::make_corpus_instance(spec);
      qp::write_tensor(instance.tokens.data, synth_out);
      if (!synth_weights_out.empty()) {
        qp::write_tensor(instance.weights, synth_weights_out);
      }
      if (!synth_semantic_out.empty()) {
        // Raw cosine values so downstream ingestion renormalizes them.
        qp::write_tensor(instance.semantic.raw, synth_semantic_out);
      }
      summary["outlier_tokens"] = instance.outlier_tokens;
    } else {
      qp::SyntheticTokens synth_tokens = qp::gen_synthetic_tokens(spec);
      qp::write_tensor(synth_tokens.tokens.data, synth_out);
      summary["outlier_tokens"] = synth_tokens.outlier_tokens;
    }
    std::cout << summary.dump() << "\n";
    return 0;
  }

  auto parse_injected = [](const std::string& text) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t used = 0;
      try {
        out.push_back(std::stoull(text.substr(pos), &used));
      } catch (const std::exception&) {
        throw qp::ConfigError("bad --injected list '" + text + "'");
      }
      pos += used;
      if (pos < text.size()) {
        if (text[pos] != ',') {
          throw qp::ConfigError("bad --injected list '" + text + "'");
        }
        ++pos;
      }
    }
    return out;
  };

  if (compare->parsed()) {
    qp::InputManifest inputs;
    qp::TokenMatrix tokens = load_tokens(cmp_tokens, inputs);
    qp::ScoreVector sp = semantic_from_options(tokens, cmp_semantic, cmp_qseed,
                                               cmp_query_seed, inputs);
    qp::Matrix weights = load_weights(cmp_weights, inputs);
    qp::PruneConfig cfg;
    cfg.alpha = 0.5;
    cfg.metric = qp::metric_from_string(
        pick(cmp_metric_opt, cmp_metric, file_cfg.metric,
             std::string("combine")));
    cfg.quant = cmp_quant.resolve(file_cfg);
    std::string keep_text =
        pick(cmp_keep_opt, cmp_keep, file_cfg.keep, std::string());
    if (keep_text.empty()) {
      throw qp::ConfigError("keep is required: pass --keep or set it in the "
                            "config file");
    }
    cfg.keep = qp::resolve_keep(keep_text, tokens.count());
    cfg.validate();
    std::vector<double> alphas = cmp_alphas;
    if (alphas.empty()) {
      alphas.push_back(file_cfg.alpha ? *file_cfg.alpha : 0.5);
    }
    std::vector<std::size_t> injected = parse_injected(cmp_injected);
    qp::ComparisonReport report = qp::compare_strategies(
        tokens, sp, weights, alphas, cfg.keep, cfg, injected);
    if (cmp_seed_opt->count() > 0) report.seed = cmp_seed;
    qp::emit_report(report, inputs, cmp_out,
                    qp::report_format_from_string(cmp_format));
    return 0;
  }

  if (ablate->parsed()) {
    qp::InputManifest inputs;
    qp::TokenMatrix tokens = load_tokens(abl_tokens, inputs);
    qp::ScoreVector sp = semantic_from_options(tokens, abl_semantic, abl_qseed,
                                               abl_query_seed, inputs);
    qp::Matrix weights = load_weights(abl_weights, inputs);
    qp::PruneConfig cfg = abl_flags.resolve(file_cfg, abl_quant,
                                            tokens.count());
    std::vector<std::size_t> injected = parse_injected(abl_injected);
    qp::AblationReport report =
        qp::run_ablation(tokens, sp, weights, cfg.keep, cfg, injected);
    if (abl_seed_opt->count() > 0) report.seed = abl_seed;
    qp::emit_report(report, inputs, abl_out,
                    qp::report_format_from_string(abl_format));
    return 0;
  }

  if (heatmap->parsed()) {
    qp::ScoreVector scores;
    if (!hm_scores.empty()) {
      qp::Tensor tensor = qp::read_tensor(hm_scores);
      if (!tensor.is_vector()) {
        throw qp::FormatError(hm_scores + ": scores must be 1-D");
      }
      scores.values = tensor.values;
      scores.kind = qp::ScoreKind::metric_variant;
    } else if (!hm_tokens.empty()) {
      qp::InputManifest inputs;
      qp::TokenMatrix tokens = load_tokens(hm_tokens, inputs);
      scores = qp::metric_score(
          tokens,
          qp::metric_from_string(pick(hm_metric_opt, hm_metric,
                                      file_cfg.metric,
                                      std::string("combine"))),
          hm_quant.resolve(file_cfg));
    } else {
      throw qp::ConfigError("heatmap needs --scores or --tokens");
    }
    if (hm_normalized) scores = qp::minmax_normalize(scores);
    qp::GridShape grid{hm_rows, hm_cols};
    if (grid.rows == 0 && grid.cols == 0) {
      auto side = static_cast<std::size_t>(
          std::llround(std::sqrt(static_cast<double>(scores.values.size()))));
      if (side * side != scores.values.size()) {
        throw qp::ConfigError(
            "score count is not square; pass --rows and --cols");
      }
      grid = {side, side};
    } else if (grid.rows == 0 || grid.cols == 0) {
      throw qp::ConfigError("pass both --rows and --cols");
    }
    qp::emit_heatmap_grid(scores, grid, hm_out);
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const qp::Error& e) {
    const char* label = "";
    switch (e.category()) {
      case qp::ErrorCategory::configuration: label = "configuration"; break;
      case qp::ErrorCategory::data: label = "data"; break;
      case qp::ErrorCategory::format: label = "format"; break;
      case qp::ErrorCategory::io: label = "I/O"; break;
    }
    std::cerr << "error (" << label << "): " << e.what() << "\n";
    return qp::exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
