// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one numbered check per release criterion, each printing
// a PASS/FAIL line. Exits nonzero if any criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "quantprune/evaluate.hpp"
#include "quantprune/npy.hpp"
#include "quantprune/prune.hpp"
#include "quantprune/report.hpp"
#include "quantprune/rng.hpp"
#include "quantprune/sensitivity.hpp"
#include "quantprune/synth.hpp"

using namespace quantprune;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& label, bool pass,
            const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << criterion
            << ": " << label << " (" << detail << ")\n";
  if (!pass) ++g_failures;
}

double elapsed_s(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

Matrix random_matrix(PortableRng& rng, std::size_t rows, std::size_t cols,
                     double scale) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      m(i, j) = snap_to_f32(rng.gaussian_like() * scale);
    }
  }
  return m;
}

// --- 1: quantizer oracle equivalence, 0 ulp ------------------------------
void criterion_1() {
  auto start = std::chrono::steady_clock::now();
  PortableRng rng(1001);
  const int bit_options[] = {2, 4, 8};
  std::size_t mismatches = 0;
  std::size_t checked = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    std::size_t d = 1 + rng.bounded(16);
    std::size_t gs_options[] = {1, 2, 4, d};
    std::size_t gs = gs_options[rng.bounded(4)];
    int bits = bit_options[rng.bounded(3)];
    Rounding mode = rng.bounded(2) == 0 ? Rounding::half_away_from_zero
                                        : Rounding::half_to_even;
    double eps = rng.bounded(2) == 0 ? 0.0 : 1e-8;

    std::vector<double> token(d);
    for (double& v : token) v = snap_to_f32(rng.gaussian_like() * 2.0);
    Matrix m(1, d, std::vector<double>(token));

    QuantConfig ac;
    ac.bits = bits;
    ac.group_size = static_cast<int>(gs);
    ac.scheme = Scheme::asymmetric;
    ac.rounding = mode;
    auto asym = quantize_asymmetric_groupwise(m, ac);
    auto asym_ref = oracle::ref_fakequant_row(token, bits,
                                              static_cast<int>(gs), 0.0,
                                              false, mode);

    QuantConfig sc = ac;
    sc.scheme = Scheme::symmetric;
    sc.epsilon = eps;
    auto sym = simulate_symmetric_groupwise(m, sc);
    auto sym_ref = oracle::ref_fakequant_row(token, bits,
                                             static_cast<int>(gs), eps, true,
                                             mode);
    for (std::size_t j = 0; j < d; ++j) {
      ++checked;
      if (asym.reconstructed(0, j) != asym_ref[j]) ++mismatches;
      if (sym.reconstructed(0, j) != sym_ref[j]) ++mismatches;
    }
  }
  double secs = elapsed_s(start);
  report(1, "quantizer oracle equivalence (0 ulp)",
         mismatches == 0 && secs < 10.0,
         std::to_string(checked) + " values, " + std::to_string(mismatches) +
             " mismatches, " + std::to_string(secs) + "s");
}

// --- 2: half-step bound and bit-exact idempotence ------------------------
void criterion_2() {
  auto start = std::chrono::steady_clock::now();
  PortableRng rng(1002);
  std::size_t bound_violations = 0;
  std::size_t idempotence_violations = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    std::size_t rows = 1 + rng.bounded(4);
    std::size_t cols = 1 + rng.bounded(24);
    QuantConfig cfg;
    cfg.scheme = Scheme::asymmetric;
    cfg.bits = 2 + static_cast<int>(rng.bounded(7));
    cfg.group_size = 1 + static_cast<int>(rng.bounded(12));
    Matrix m = random_matrix(rng, rows, cols, 1.5);
    auto fq = quantize_asymmetric_groupwise(m, cfg);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t g = 0; g < fq.partition.num_groups; ++g) {
        auto range = fq.partition.group(g);
        double s = fq.scales(i, g);
        for (std::size_t j = range.begin; j < range.end; ++j) {
          double diff = std::fabs(m(i, j) - fq.reconstructed(i, j));
          if (diff > 0.5 * s * (1.0 + 1e-12)) ++bound_violations;
        }
      }
    }
    auto fq2 = quantize_asymmetric_groupwise(fq.reconstructed, cfg);
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (fq2.reconstructed.values()[i] != fq.reconstructed.values()[i]) {
        ++idempotence_violations;
      }
    }
  }
  double secs = elapsed_s(start);
  report(2, "half-step bound and idempotence",
         bound_violations == 0 && idempotence_violations == 0 && secs < 10.0,
         std::to_string(bound_violations) + " bound / " +
             std::to_string(idempotence_violations) + " idempotence, " +
             std::to_string(secs) + "s");
}

// --- 3: grid-exactness ----------------------------------------------------
void criterion_3() {
  QuantConfig cfg;
  cfg.epsilon = 0.0;
  cfg.group_size = 4;
  PortableRng rng(1003);
  bool ok = true;

  for (int iter = 0; iter < 200; ++iter) {
    // Entries are integer multiples of a power-of-two scale with |k| <= 7;
    // every group attains the extreme so each group scale recomputes to s.
    std::size_t d = 4 + rng.bounded(8);
    double s = std::ldexp(1.0, -static_cast<int>(rng.bounded(4)));
    Matrix m(1, d);
    for (std::size_t j = 0; j < d; ++j) {
      auto k = static_cast<double>(static_cast<std::int64_t>(rng.bounded(15)) -
                                   7);
      m(0, j) = k * s;
    }
    for (std::size_t begin = 0; begin < d; begin += 4) {
      std::size_t len = std::min<std::size_t>(4, d - begin);
      double sign = rng.bounded(2) == 0 ? 1.0 : -1.0;
      m(0, begin + rng.bounded(len)) = sign * 7.0 * s;
    }
    auto tm = make_token_matrix(std::move(m));
    if (group_quant_error(tm, cfg).values[0] != 0.0) ok = false;
  }

  Matrix zeros(2, 6);
  auto ztm = make_token_matrix(std::move(zeros));
  ok = ok && group_quant_error(ztm, cfg).values[0] == 0.0 &&
       group_quant_error(ztm, cfg).values[1] == 0.0 &&
       outlier_intensity(ztm).values[0] == 0.0 &&
       outlier_intensity(ztm).values[1] == 0.0;
  report(3, "grid-exactness (E = 0, R = 0)", ok,
         "grid tokens and zero tokens exact");
}

// --- 4: bit-exact S^Q scale invariance ------------------------------------
void criterion_4() {
  PortableRng rng(1004);
  QuantConfig cfg;
  cfg.epsilon = 0.0;
  cfg.group_size = 16;
  std::size_t mismatches = 0;
  for (int iter = 0; iter < 100; ++iter) {
    std::size_t n = 4 + rng.bounded(12);
    std::size_t d = 16 + rng.bounded(48);
    Matrix m = random_matrix(rng, n, d, 1.0);
    // Nondegenerate spans: spike one token.
    m(rng.bounded(n), rng.bounded(d)) = 25.0;
    auto tm = make_token_matrix(std::move(m));
    auto base = hybrid_sensitivity(tm, cfg);
    for (double c : {0.5, 2.0, 4.0}) {
      Matrix scaled(n, d);
      for (std::size_t i = 0; i < scaled.size(); ++i) {
        scaled.values()[i] = c * tm.data.values()[i];
      }
      auto got = hybrid_sensitivity(make_token_matrix(std::move(scaled)), cfg);
      for (std::size_t i = 0; i < n; ++i) {
        if (got.values[i] != base.values[i]) ++mismatches;
      }
    }
  }
  report(4, "power-of-two scale invariance of S^Q", mismatches == 0,
         std::to_string(mismatches) + " mismatches over 100 matrices");
}

// --- 5: fusion degeneracy ---------------------------------------------------
void criterion_5() {
  PortableRng rng(1005);
  std::size_t failures = 0;
  for (int iter = 0; iter < 100; ++iter) {
    std::size_t n = 8 + rng.bounded(24);
    std::size_t d = 8 + rng.bounded(24);
    Matrix m = random_matrix(rng, n, d, 1.0);
    auto tm = make_token_matrix(std::move(m));
    std::vector<double> sp_raw(n);
    for (double& x : sp_raw) x = rng.uniform01();
    auto sp = load_external_semantic_scores(sp_raw, n);

    PruneConfig cfg;
    cfg.keep = 1 + static_cast<std::int64_t>(rng.bounded(n));
    cfg.quant.group_size = 8;

    cfg.alpha = 1.0;
    auto semantic_only = prune(tm, sp, cfg);
    if (semantic_only.selected_indices !=
        select_topk(sp, cfg.keep).selected) {
      ++failures;
    }

    cfg.alpha = 0.0;
    auto quant_only = prune(tm, sp, cfg);
    auto sq = hybrid_sensitivity(tm, cfg.quant);
    if (quant_only.selected_indices != select_topk(sq, cfg.keep).selected) {
      ++failures;
    }
  }
  report(5, "fusion degeneracy at alpha 0 and 1", failures == 0,
         std::to_string(failures) + " failures over 100 instances");
}

// --- 6: teaser reconstruction ----------------------------------------------
void criterion_6() {
  int recovered = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto inst = adversarial_instance(seed);
    PruneConfig cfg;
    cfg.keep = inst.keep;

    cfg.alpha = 1.0;
    auto semantic_only = prune(inst.tokens, inst.semantic, cfg);
    bool excluded = !std::binary_search(semantic_only.selected_indices.begin(),
                                        semantic_only.selected_indices.end(),
                                        inst.expected_index);

    cfg.alpha = 0.5;
    auto fused = prune(inst.tokens, inst.semantic, cfg);
    bool included = std::binary_search(fused.selected_indices.begin(),
                                       fused.selected_indices.end(),
                                       inst.expected_index);
    if (excluded && included) ++recovered;
  }
  report(6, "teaser scenario over 20 seeds", recovered == 20,
         std::to_string(recovered) + "/20 recovered");
}

// --- 7: proxy-error win rate over the frozen corpus -------------------------
void criterion_7() {
  auto start = std::chrono::steady_clock::now();
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SyntheticSpec spec;  // frozen corpus: N=256 D=1024 4x32@20, K=32
    spec.seed = seed;
    auto inst = make_corpus_instance(spec, 64);
    PruneConfig cfg;
    cfg.quant.group_size = 128;
    auto rep = compare_strategies(inst.tokens, inst.semantic, inst.weights,
                                  {0.5}, 32, cfg, inst.outlier_tokens);
    double fused = 0.0, semantic = 0.0;
    for (const auto& row : rep.strategies) {
      if (row.name == "fused") fused = row.errors.downstream_proxy_error;
      if (row.name == "semantic_only") {
        semantic = row.errors.downstream_proxy_error;
      }
    }
    if (fused <= semantic) ++wins;
  }
  double secs = elapsed_s(start);
  report(7, "fused <= semantic-only proxy error on >= 90/100 seeds",
         wins >= 90 && secs < 120.0,
         std::to_string(wins) + "/100 wins, " + std::to_string(secs) + "s");
}

// --- 8: ablation coverage and combine ordering ------------------------------
void criterion_8() {
  std::array<double, 9> sums{};
  bool coverage = true;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    auto inst = make_corpus_instance(spec, 64);
    PruneConfig cfg;
    auto rep = run_ablation(inst.tokens, inst.semantic, inst.weights, 32, cfg,
                            inst.outlier_tokens);
    if (rep.rows.size() != 9) coverage = false;
    std::set<MetricId> seen;
    for (const auto& row : rep.rows) {
      seen.insert(row.metric);
      if (row.selected.size() != 32) coverage = false;
      sums[static_cast<std::size_t>(row.metric)] +=
          row.errors.downstream_proxy_error;
    }
    if (seen.size() != 9) coverage = false;
  }
  double combine = sums[static_cast<std::size_t>(MetricId::combine)] / 100.0;
  double groupwise =
      sums[static_cast<std::size_t>(MetricId::groupwise_absmax)] / 100.0;
  double outlier =
      sums[static_cast<std::size_t>(MetricId::outlier_intensity)] / 100.0;
  double best_single = std::min(groupwise, outlier);
  bool ordering = combine <= best_single * 1.02;
  std::ostringstream detail;
  detail << "combine " << combine << " vs best single " << best_single
         << " (+2% slack)";
  report(8, "ablation coverage and combine ordering", coverage && ordering,
         detail.str());
}

// --- 9: I/O determinism and the CLI ratio form -------------------------------
void criterion_9() {
  fs::path dir = fs::temp_directory_path() /
                 ("quantprune_accept_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  bool ok = true;
  std::string detail;

  // NPY round trip.
  PortableRng rng(1009);
  Matrix m = random_matrix(rng, 16, 8, 1.0);
  write_tensor(m, dir / "m.npy");
  auto round = read_tensor(dir / "m.npy");
  ok = ok && round.values == m.values();

  // Byte-identical report emission.
  SyntheticSpec spec;
  spec.n_tokens = 32;
  spec.dim = 64;
  spec.n_outlier_tokens = 1;
  spec.outlier_channels_per_token = 8;
  spec.seed = 2;
  auto inst = make_corpus_instance(spec, 8);
  PruneConfig cfg;
  cfg.keep = 8;
  cfg.quant.group_size = 16;
  auto result = prune(inst.tokens, inst.semantic, cfg);
  emit_report(result, {}, dir / "r1.json", ReportFormat::json);
  emit_report(result, {}, dir / "r2.json", ReportFormat::json);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
  };
  ok = ok && !slurp(dir / "r1.json").empty() &&
       slurp(dir / "r1.json") == slurp(dir / "r2.json");

  // CLI: prune --keep ratio:0.125 on 256 tokens selects exactly 32.
  const char* cli = std::getenv("QUANTPRUNE_CLI");
  if (cli == nullptr || std::string(cli).empty()) {
    ok = false;
    detail = "QUANTPRUNE_CLI not set";
  } else {
    SyntheticSpec big;  // defaults: 256 x 1024
    big.seed = 4;
    auto synth = gen_synthetic_tokens(big);
    write_tensor(synth.tokens.data, dir / "tokens.npy");
    std::vector<double> sp(256);
    PortableRng sprng(5);
    for (double& x : sp) x = sprng.uniform01();
    write_tensor(sp, dir / "sp.npy");
    std::string cmd = std::string(cli) + " prune --tokens " +
                      (dir / "tokens.npy").string() + " --semantic " +
                      (dir / "sp.npy").string() +
                      " --alpha 0.5 --keep ratio:0.125 --out " +
                      (dir / "prune.json").string();
    int rc = std::system(cmd.c_str());
    ok = ok && rc == 0;
    std::string json = slurp(dir / "prune.json");
    auto pos = json.find("\"k_effective\": 32");
    ok = ok && pos != std::string::npos;
    // Count the selected indices directly as well.
    auto sel_pos = json.find("\"selected_indices\": [");
    if (sel_pos == std::string::npos) {
      ok = false;
    } else {
      auto end = json.find(']', sel_pos);
      std::string body = json.substr(sel_pos, end - sel_pos);
      std::size_t commas = std::count(body.begin(), body.end(), ',');
      ok = ok && commas == 31;
    }
    if (detail.empty()) detail = "round trip, bytes, ratio:0.125 -> 32";
  }

  std::error_code ec;
  fs::remove_all(dir, ec);
  report(9, "I/O determinism and CLI ratio keep", ok, detail);
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures != 0) {
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
