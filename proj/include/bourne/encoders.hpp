#pragma once

#include <cstddef>
#include <vector>

#include "bourne/model.hpp"
#include "bourne/sparse.hpp"
#include "bourne/tensor.hpp"
#include "bourne/view.hpp"

namespace bourne {

// D~^-1/2 (A + I) D~^-1/2
SparseMatrix gcn_propagation(const SparseMatrix& adjacency);
// Dv^-1/2 M De^-1 M^T Dv^-1/2 with identity hyperedge weights. Rows of M are
// dual nodes, columns hyperedges. Hyperedges without members contribute
// nothing.
SparseMatrix hypergraph_propagation(const SparseMatrix& incidence);

Matrix gcn_forward(const SparseMatrix& adjacency, const Matrix& features, const Matrix& weight,
                   float slope);
Matrix predictor_forward(const Matrix& h, const OnlineParameters& params);
// Mean of all rows but the last.
RowVector graph_readout(const Matrix& hbar);

Matrix hgnn_forward(const SparseMatrix& incidence, const Matrix& features, const Matrix& weight,
                    float slope);
// Mean of the first `num_context` rows.
RowVector hyper_readout(const Matrix& z, std::size_t num_context);

struct GraphEncoderOutput {
  RowVector patch;     // h_p, row 0
  RowVector target;    // h_t, row N_s
  RowVector subgraph;  // h_s
  Matrix hbar;
};

struct HyperEncoderOutput {
  Matrix target_rows;   // Z_t
  Matrix context_rows;  // Z_p
  RowVector subgraph;   // z_s
  Matrix z;
};

GraphEncoderOutput encode_graph_view(const ViewPair& view, const Matrix& x,
                                     const BourneModel& model);
HyperEncoderOutput encode_hyper_view(const ViewPair& view, const Matrix& x,
                                     const BourneModel& model);

// Stacked encoder over many views at once. Rows of `select` pick (weighted)
// rows of the gathered inputs; `propagation` is block diagonal across views.
// Layer 1 computes prelu(prop * select * (x W)), so x W is evaluated once per
// distinct node rather than once per view slot.
struct BranchCache {
  std::vector<Matrix> pre;   // per layer, before PReLU
  std::vector<Matrix> post;  // per layer, after PReLU
};

Matrix branch_forward(const SparseMatrix& select, const SparseMatrix& propagation,
                      const Matrix& inputs, const std::vector<Parameter>& weights,
                      const std::vector<Parameter>& slopes, BranchCache* cache);

// Accumulates into weights[l].grad and slopes[l].grad.
void branch_backward(const SparseMatrix& select, const SparseMatrix& propagation,
                     const Matrix& inputs, std::vector<Parameter>& weights,
                     std::vector<Parameter>& slopes, const BranchCache& cache, Matrix d_out);

struct PredictorCache {
  Matrix hidden_pre;
  Matrix hidden;
};

Matrix predictor_forward(const Matrix& h, const OnlineParameters& params, PredictorCache* cache);
// Returns dL/dh; accumulates predictor gradients.
Matrix predictor_backward(const Matrix& h, OnlineParameters& params, const PredictorCache& cache,
                          const Matrix& d_out);

}  // namespace bourne
