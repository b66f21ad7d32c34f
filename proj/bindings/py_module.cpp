// SPDX-License-Identifier: Apache-2.0

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "quantprune/errors.hpp"
#include "quantprune/evaluate.hpp"
#include "quantprune/prune.hpp"
#include "quantprune/quant.hpp"
#include "quantprune/sensitivity.hpp"
#include "quantprune/synth.hpp"
#include "quantprune/version.hpp"

namespace py = pybind11;
namespace qp = quantprune;

namespace {

qp::Matrix matrix_from_array(const py::array_t<double>& array) {
  auto buf = array.request();
  if (buf.ndim != 2) throw qp::DataError("expected a 2-D array");
  auto view = array.unchecked<2>();
  qp::Matrix m(static_cast<std::size_t>(buf.shape[0]),
               static_cast<std::size_t>(buf.shape[1]));
  for (py::ssize_t i = 0; i < buf.shape[0]; ++i) {
    for (py::ssize_t j = 0; j < buf.shape[1]; ++j) {
      m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = view(i, j);
    }
  }
  return m;
}

std::vector<double> vector_from_array(const py::array_t<double>& array) {
  auto buf = array.request();
  if (buf.ndim != 1) throw qp::DataError("expected a 1-D array");
  auto view = array.unchecked<1>();
  std::vector<double> v(static_cast<std::size_t>(buf.shape[0]));
  for (py::ssize_t i = 0; i < buf.shape[0]; ++i) {
    v[static_cast<std::size_t>(i)] = view(i);
  }
  return v;
}

py::array_t<double> array_from_matrix(const qp::Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      view(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(j)) = m(i, j);
    }
  }
  return out;
}

py::array_t<double> array_from_vector(const std::vector<double>& v) {
  py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
  auto view = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < v.size(); ++i) {
    view(static_cast<py::ssize_t>(i)) = v[i];
  }
  return out;
}

qp::QuantConfig make_config(int bits, int group_size, const std::string& scheme,
                            double epsilon, const std::string& rounding,
                            double clip_percentile) {
  qp::QuantConfig cfg;
  cfg.bits = bits;
  cfg.group_size = group_size;
  cfg.scheme = qp::scheme_from_string(scheme);
  cfg.epsilon = epsilon;
  cfg.rounding = qp::rounding_from_string(rounding);
  cfg.clip_percentile = clip_percentile;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantization-aware visual token scoring and pruning";
  m.attr("__version__") = qp::kVersion;

  py::register_exception<qp::ConfigError>(m, "ConfigError");
  py::register_exception<qp::DataError>(m, "DataError");
  py::register_exception<qp::FormatError>(m, "FormatError");
  py::register_exception<qp::IoError>(m, "IoError");

  m.def(
      "partition_groups",
      [](std::size_t dim, std::size_t group_size) {
        auto p = qp::partition_groups(dim, group_size);
        return py::make_tuple(p.num_groups, p.last_group_size);
      },
      py::arg("dim"), py::arg("group_size"),
      "Contiguous grouping; returns (num_groups, last_group_size)");

  m.def(
      "quantize_asymmetric",
      [](const py::array_t<double>& tensor, int bits, int group_size,
         double epsilon, const std::string& rounding) {
        auto cfg = make_config(bits, group_size, "asymmetric", epsilon,
                               rounding, 99.0);
        auto fq = qp::quantize_asymmetric_groupwise(matrix_from_array(tensor),
                                                    cfg);
        return py::make_tuple(array_from_matrix(fq.reconstructed),
                              array_from_matrix(fq.scales),
                              array_from_matrix(fq.zero_points));
      },
      py::arg("tensor"), py::arg("bits") = 4, py::arg("group_size") = 128,
      py::arg("epsilon") = 1e-8, py::arg("rounding") = "half_away_from_zero",
      "Group-wise asymmetric fake quantization; returns "
      "(reconstructed, scales, zero_points)");

  m.def(
      "simulate_symmetric",
      [](const py::array_t<double>& tensor, int bits, int group_size,
         double epsilon, const std::string& rounding) {
        auto cfg = make_config(bits, group_size, "symmetric", epsilon,
                               rounding, 99.0);
        auto fq =
            qp::simulate_symmetric_groupwise(matrix_from_array(tensor), cfg);
        return py::make_tuple(array_from_matrix(fq.reconstructed),
                              array_from_matrix(fq.scales));
      },
      py::arg("tensor"), py::arg("bits") = 4, py::arg("group_size") = 128,
      py::arg("epsilon") = 1e-8, py::arg("rounding") = "half_away_from_zero",
      "Group-wise symmetric INT-b simulation; returns (reconstructed, scales)");

  m.def(
      "quantized_matmul_proxy",
      [](const py::array_t<double>& activations,
         const py::array_t<double>& weights, int bits, int group_size,
         const std::string& scheme, double epsilon) {
        auto cfg = make_config(bits, group_size, scheme, epsilon,
                               "half_away_from_zero", 99.0);
        return array_from_matrix(qp::quantized_matmul_proxy(
            matrix_from_array(activations), matrix_from_array(weights), cfg));
      },
      py::arg("activations"), py::arg("weights"), py::arg("bits") = 4,
      py::arg("group_size") = 128, py::arg("scheme") = "asymmetric",
      py::arg("epsilon") = 1e-8, "Q(X)Q(W) with exact multiplication");

  auto score_fn = [](const py::array_t<double>& tokens,
                     const std::string& metric, int bits, int group_size,
                     const std::string& scheme, double epsilon,
                     const std::string& rounding, double clip_percentile) {
    auto cfg = make_config(bits, group_size, scheme, epsilon, rounding,
                           clip_percentile);
    auto tm = qp::make_token_matrix(matrix_from_array(tokens));
    return array_from_vector(
        qp::metric_score(tm, qp::metric_from_string(metric), cfg).values);
  };
  m.def("metric_score", score_fn, py::arg("tokens"),
        py::arg("metric") = "combine", py::arg("bits") = 4,
        py::arg("group_size") = 128, py::arg("scheme") = "symmetric",
        py::arg("epsilon") = 1e-8,
        py::arg("rounding") = "half_away_from_zero",
        py::arg("clip_percentile") = 99.0,
        "One of the nine sensitivity metrics (raw values; `combine` is the "
        "normalized hybrid)");

  m.def(
      "group_quant_error",
      [](const py::array_t<double>& tokens, int bits, int group_size,
         double epsilon) {
        auto cfg = make_config(bits, group_size, "symmetric", epsilon,
                               "half_away_from_zero", 99.0);
        auto tm = qp::make_token_matrix(matrix_from_array(tokens));
        return array_from_vector(qp::group_quant_error(tm, cfg).values);
      },
      py::arg("tokens"), py::arg("bits") = 4, py::arg("group_size") = 128,
      py::arg("epsilon") = 1e-8, "E_i: L2 residual of the symmetric simulation");

  m.def(
      "outlier_intensity",
      [](const py::array_t<double>& tokens) {
        auto tm = qp::make_token_matrix(matrix_from_array(tokens));
        return array_from_vector(qp::outlier_intensity(tm).values);
      },
      py::arg("tokens"), "R_i: per-token max - min");

  m.def(
      "hybrid_sensitivity",
      [](const py::array_t<double>& tokens, int bits, int group_size,
         double epsilon) {
        auto cfg = make_config(bits, group_size, "symmetric", epsilon,
                               "half_away_from_zero", 99.0);
        auto tm = qp::make_token_matrix(matrix_from_array(tokens));
        return array_from_vector(qp::hybrid_sensitivity(tm, cfg).values);
      },
      py::arg("tokens"), py::arg("bits") = 4, py::arg("group_size") = 128,
      py::arg("epsilon") = 1e-8, "S^Q: equal-weight sum of normalized E and R");

  m.def(
      "minmax_normalize",
      [](const py::array_t<double>& values) {
        qp::ScoreVector v;
        v.values = vector_from_array(values);
        return array_from_vector(qp::minmax_normalize(v).values);
      },
      py::arg("values"), "(x - min)/(max - min); all 0.5 when degenerate");

  m.def(
      "fuse_scores",
      [](const py::array_t<double>& sp, const py::array_t<double>& sq,
         double alpha) {
        qp::ScoreVector a, b;
        a.values = vector_from_array(sp);
        a.normalized = true;
        b.values = vector_from_array(sq);
        b.normalized = true;
        return array_from_vector(qp::fuse_scores(a, b, alpha).values);
      },
      py::arg("sp"), py::arg("sq"), py::arg("alpha"),
      "alpha*sp + (1-alpha)*sq");

  m.def(
      "select_topk",
      [](const py::array_t<double>& scores, std::int64_t k) {
        qp::ScoreVector v;
        v.values = vector_from_array(scores);
        auto sel = qp::select_topk(v, k);
        return py::make_tuple(sel.selected, sel.rank_order, sel.clamped);
      },
      py::arg("scores"), py::arg("k"),
      "Deterministic top-k; returns (selected, rank_order, clamped)");

  m.def(
      "semantic_score_cosine",
      [](const py::array_t<double>& tokens, const py::array_t<double>& query) {
        auto tm = qp::make_token_matrix(matrix_from_array(tokens));
        auto q = vector_from_array(query);
        return array_from_vector(qp::semantic_score_cosine(tm, q).values);
      },
      py::arg("tokens"), py::arg("query"),
      "Normalized cosine relevance against a query vector");

  m.def(
      "prune",
      [](const py::array_t<double>& tokens, const py::array_t<double>& sp,
         double alpha, std::int64_t keep, const std::string& metric, int bits,
         int group_size, const std::string& scheme, double epsilon,
         const std::string& rounding, double clip_percentile) {
        auto tm = qp::make_token_matrix(matrix_from_array(tokens));
        qp::ScoreVector semantic = qp::load_external_semantic_scores(
            vector_from_array(sp), tm.count());
        qp::PruneConfig cfg;
        cfg.alpha = alpha;
        cfg.keep = keep;
        cfg.metric = qp::metric_from_string(metric);
        cfg.quant = make_config(bits, group_size, scheme, epsilon, rounding,
                                clip_percentile);
        auto result = qp::prune(tm, semantic, cfg);
        py::dict out;
        out["selected_indices"] = result.selected_indices;
        out["rank_order"] = result.rank_order;
        out["semantic_raw"] = array_from_vector(result.semantic_raw);
        out["semantic"] = array_from_vector(result.semantic_norm);
        out["quant_sensitivity"] = array_from_vector(result.quant_sensitivity);
        out["final"] = array_from_vector(result.fused);
        out["clamped"] = result.keep_clamped;
        return out;
      },
      py::arg("tokens"), py::arg("sp"), py::arg("alpha") = 0.5,
      py::arg("keep") = 1, py::arg("metric") = "combine", py::arg("bits") = 4,
      py::arg("group_size") = 128, py::arg("scheme") = "symmetric",
      py::arg("epsilon") = 1e-8,
      py::arg("rounding") = "half_away_from_zero",
      py::arg("clip_percentile") = 99.0,
      "Full pipeline; sp is ingested raw and renormalized");

  m.def(
      "gen_synthetic_tokens",
      [](std::uint64_t seed, std::size_t n_tokens, std::size_t dim,
         double base_scale, std::size_t n_outlier_tokens,
         double outlier_magnitude, std::size_t outlier_channels_per_token) {
        qp::SyntheticSpec spec;
        spec.seed = seed;
        spec.n_tokens = n_tokens;
        spec.dim = dim;
        spec.base_scale = base_scale;
        spec.n_outlier_tokens = n_outlier_tokens;
        spec.outlier_magnitude = outlier_magnitude;
        spec.outlier_channels_per_token = outlier_channels_per_token;
        auto synth = qp::gen_synthetic_tokens(spec);
        return py::make_tuple(array_from_matrix(synth.tokens.data),
                              synth.outlier_tokens);
      },
      py::arg("seed"), py::arg("n_tokens") = 256, py::arg("dim") = 1024,
      py::arg("base_scale") = 1.0, py::arg("n_outlier_tokens") = 4,
      py::arg("outlier_magnitude") = 20.0,
      py::arg("outlier_channels_per_token") = 32,
      "Seeded token matrix with injected outlier tokens; returns "
      "(tokens, outlier_indices)");

  m.def(
      "adversarial_instance",
      [](std::uint64_t seed) {
        auto inst = qp::adversarial_instance(seed);
        py::dict out;
        out["tokens"] = array_from_matrix(inst.tokens.data);
        out["semantic"] = array_from_vector(inst.semantic.values);
        out["expected_index"] = inst.expected_index;
        out["keep"] = inst.keep;
        return out;
      },
      py::arg("seed"),
      "Teaser scenario: max-outlier token dropped at alpha=1, kept at 0.5");

  m.def(
      "eval_downstream_error",
      [](const py::array_t<double>& tokens,
         const std::vector<std::size_t>& selected,
         const py::array_t<double>& weights, int bits, int group_size,
         const std::string& scheme, double epsilon) {
        auto tm = qp::make_token_matrix(matrix_from_array(tokens));
        qp::PruneResult sel;
        sel.selected_indices = selected;
        auto cfg = make_config(bits, group_size, scheme, epsilon,
                               "half_away_from_zero", 99.0);
        auto record = qp::eval_downstream_error(tm, sel,
                                                matrix_from_array(weights), cfg);
        return py::make_tuple(record.retained_fakequant_error,
                              record.downstream_proxy_error);
      },
      py::arg("tokens"), py::arg("selected"), py::arg("weights"),
      py::arg("bits") = 4, py::arg("group_size") = 128,
      py::arg("scheme") = "asymmetric", py::arg("epsilon") = 1e-8,
      "Relative Frobenius errors over the retained rows; returns "
      "(retained_fakequant_error, downstream_proxy_error)");
}
