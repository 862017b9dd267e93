#include "bourne/encoders.hpp"

#include <cmath>

#include "bourne/errors.hpp"
#include "bourne/nn.hpp"

namespace bourne {

namespace {

std::vector<float> inverse_sqrt(const std::vector<double>& degrees, const char* what) {
  std::vector<float> out(degrees.size());
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    if (!(degrees[i] > 0.0)) {
      throw NumericalError(std::string(what) + ": zero degree at row " + std::to_string(i));
    }
    out[i] = static_cast<float>(1.0 / std::sqrt(degrees[i]));
  }
  return out;
}

float slope_of(const Parameter& p) { return p.value(0, 0); }

}  // namespace

SparseMatrix gcn_propagation(const SparseMatrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) throw InvalidInput("gcn: adjacency not square");
  std::vector<Triplet> t;
  t.reserve(adjacency.nnz() + adjacency.rows());
  for (std::uint32_t r = 0; r < adjacency.rows(); ++r) {
    const auto idx = adjacency.row_indices(r);
    const auto val = adjacency.row_values(r);
    for (std::size_t i = 0; i < idx.size(); ++i) t.push_back({r, idx[i], val[i]});
    t.push_back({r, r, 1.0f});
  }
  const auto with_loops =
      SparseMatrix::from_triplets(adjacency.rows(), adjacency.cols(), std::move(t));
  const auto d = inverse_sqrt(with_loops.row_sums(), "gcn");
  return with_loops.scaled(d, d);
}

SparseMatrix hypergraph_propagation(const SparseMatrix& incidence) {
  const auto dv = inverse_sqrt(incidence.row_sums(), "hgnn");
  const auto de_sums = incidence.col_sums();
  std::vector<float> de_inv(de_sums.size(), 0.0f);
  for (std::size_t j = 0; j < de_sums.size(); ++j) {
    if (de_sums[j] > 0.0) de_inv[j] = static_cast<float>(1.0 / de_sums[j]);
  }
  const std::vector<float> ones_right(incidence.cols(), 1.0f);
  const auto left = incidence.scaled(dv, de_inv);                        // Dv^-1/2 M De^-1
  const auto right = incidence.transpose().scaled(ones_right, dv);       // M^T Dv^-1/2
  return spgemm(left, right);
}

Matrix gcn_forward(const SparseMatrix& adjacency, const Matrix& features, const Matrix& weight,
                   float slope) {
  if (static_cast<std::size_t>(features.rows()) != adjacency.rows()) {
    throw InvalidInput("gcn_forward: feature rows do not match adjacency");
  }
  return prelu_forward(spmm(gcn_propagation(adjacency), linear_forward(features, weight)), slope);
}

Matrix predictor_forward(const Matrix& h, const OnlineParameters& params) {
  return predictor_forward(h, params, nullptr);
}

Matrix predictor_forward(const Matrix& h, const OnlineParameters& params, PredictorCache* cache) {
  Matrix pre = linear_forward(h, params.predictor_in.value);
  Matrix hidden = prelu_forward(pre, slope_of(params.predictor_slope));
  Matrix out = linear_forward(hidden, params.predictor_out.value);
  if (cache) {
    cache->hidden_pre = std::move(pre);
    cache->hidden = std::move(hidden);
  }
  return out;
}

Matrix predictor_backward(const Matrix& h, OnlineParameters& params, const PredictorCache& cache,
                          const Matrix& d_out) {
  const Matrix d_hidden =
      linear_backward(cache.hidden, params.predictor_out.value, d_out, params.predictor_out.grad);
  float d_slope = 0.0f;
  const Matrix d_pre =
      prelu_backward(cache.hidden_pre, slope_of(params.predictor_slope), d_hidden, d_slope);
  params.predictor_slope.grad(0, 0) += d_slope;
  return linear_backward(h, params.predictor_in.value, d_pre, params.predictor_in.grad);
}

RowVector graph_readout(const Matrix& hbar) {
  if (hbar.rows() < 2) throw InvalidInput("graph_readout: needs at least one context row");
  return hbar.topRows(hbar.rows() - 1).cast<double>().colwise().mean().cast<float>();
}

Matrix hgnn_forward(const SparseMatrix& incidence, const Matrix& features, const Matrix& weight,
                    float slope) {
  if (static_cast<std::size_t>(features.rows()) != incidence.rows()) {
    throw InvalidInput("hgnn_forward: feature rows do not match incidence");
  }
  return prelu_forward(spmm(hypergraph_propagation(incidence), linear_forward(features, weight)),
                       slope);
}

RowVector hyper_readout(const Matrix& z, std::size_t num_context) {
  if (num_context == 0 || num_context > static_cast<std::size_t>(z.rows())) {
    throw InvalidInput("hyper_readout: bad context row count");
  }
  return z.topRows(static_cast<Eigen::Index>(num_context))
      .cast<double>()
      .colwise()
      .mean()
      .cast<float>();
}

GraphEncoderOutput encode_graph_view(const ViewPair& view, const Matrix& x,
                                     const BourneModel& model) {
  const auto& online = model.online;
  Matrix h = view.node_features(x);
  for (std::size_t l = 0; l < online.gcn_weights.size(); ++l) {
    h = gcn_forward(view.adjacency, h, online.gcn_weights[l].value, slope_of(online.gcn_slopes[l]));
  }
  GraphEncoderOutput out;
  out.hbar = predictor_forward(h, online);
  const auto ns = static_cast<Eigen::Index>(view.num_slots());
  out.patch = out.hbar.row(0);
  out.target = out.hbar.row(ns);
  out.subgraph = graph_readout(out.hbar);
  return out;
}

HyperEncoderOutput encode_hyper_view(const ViewPair& view, const Matrix& x,
                                     const BourneModel& model) {
  const auto& target = model.target;
  Matrix z = view.edge_features(x);
  for (std::size_t l = 0; l < target.hgnn_weights.size(); ++l) {
    z = hgnn_forward(view.incidence, z, target.hgnn_weights[l].value,
                     slope_of(target.hgnn_slopes[l]));
  }
  const auto ms = static_cast<Eigen::Index>(view.num_dual_nodes());
  const auto mt = static_cast<Eigen::Index>(view.num_target_edges());
  HyperEncoderOutput out;
  out.context_rows = z.topRows(mt);
  out.target_rows = z.middleRows(ms, mt);
  out.subgraph = hyper_readout(z, view.num_dual_nodes());
  out.z = std::move(z);
  return out;
}

Matrix branch_forward(const SparseMatrix& select, const SparseMatrix& propagation,
                      const Matrix& inputs, const std::vector<Parameter>& weights,
                      const std::vector<Parameter>& slopes, BranchCache* cache) {
  if (cache) {
    cache->pre.clear();
    cache->post.clear();
  }
  Matrix h;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Matrix g = l == 0 ? spmm(select, linear_forward(inputs, weights[0].value))
                      : linear_forward(h, weights[l].value);
    Matrix pre = spmm(propagation, g);
    h = prelu_forward(pre, slope_of(slopes[l]));
    if (cache) {
      cache->pre.push_back(std::move(pre));
      cache->post.push_back(h);
    }
  }
  return h;
}

void branch_backward(const SparseMatrix& select, const SparseMatrix& propagation,
                     const Matrix& inputs, std::vector<Parameter>& weights,
                     std::vector<Parameter>& slopes, const BranchCache& cache, Matrix d_out) {
  for (std::size_t l = weights.size(); l-- > 0;) {
    float d_slope = 0.0f;
    const Matrix d_pre = prelu_backward(cache.pre[l], slope_of(slopes[l]), d_out, d_slope);
    slopes[l].grad(0, 0) += d_slope;
    const Matrix d_g = spmm_transposed(propagation, d_pre);
    if (l == 0) {
      const Matrix d_p = spmm_transposed(select, d_g);
      weights[0].grad.noalias() += inputs.transpose() * d_p;
    } else {
      d_out = linear_backward(cache.post[l - 1], weights[l].value, d_g, weights[l].grad);
    }
  }
}

}  // namespace bourne
