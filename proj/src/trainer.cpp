#include "bourne/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "bourne/encoders.hpp"
#include "bourne/errors.hpp"
#include "bourne/nn.hpp"
#include "bourne/parallel.hpp"
#include "bourne/random.hpp"

namespace bourne {

void ScoreWeights::validate() const {
  if (!(alpha >= 0.0f && alpha <= 1.0f && beta >= 0.0f && beta <= 1.0f)) {
    throw InvalidInput("score weights must lie in [0, 1]");
  }
  if (alpha == 0.0f && beta == 0.0f) throw InvalidInput("alpha and beta cannot both be zero");
}

void TrainConfig::validate() const {
  if (batch_size == 0 || epochs == 0 || embedding_dim == 0 || predictor_hidden == 0 ||
      layers == 0 || eval_rounds == 0 || threads == 0) {
    throw InvalidInput("batch_size, epochs, dimensions, layers, eval_rounds and threads must be positive");
  }
  if (!(learning_rate > 0.0f) || !std::isfinite(learning_rate)) {
    throw InvalidInput("learning_rate must be positive");
  }
  if (!(tau >= 0.0f && tau <= 1.0f)) throw InvalidInput("tau must lie in [0, 1]");
  view.validate();
  weights.validate();
}

ModelConfig TrainConfig::model_config(std::size_t input_dim) const {
  ModelConfig m;
  m.input_dim = input_dim;
  m.embedding_dim = embedding_dim;
  m.predictor_hidden = predictor_hidden;
  m.layers = layers;
  return m;
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},
                     {"epochs", c.epochs},
                     {"learning_rate", c.learning_rate},
                     {"tau", c.tau},
                     {"embedding_dim", c.embedding_dim},
                     {"predictor_hidden", c.predictor_hidden},
                     {"layers", c.layers},
                     {"eval_rounds", c.eval_rounds},
                     {"seed", c.seed},
                     {"threads", c.threads},
                     {"symmetric_roles", c.symmetric_roles},
                     {"hops", c.view.hops},
                     {"subgraph_size", c.view.subgraph_size},
                     {"max_redraws", c.view.max_redraws},
                     {"feature_mask_prob", c.view.augment.feature_mask_prob},
                     {"hyperedge_drop_prob", c.view.augment.hyperedge_drop_prob},
                     {"alpha", c.weights.alpha},
                     {"beta", c.weights.beta}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  if (!j.is_object()) throw InvalidInput("training config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "batch_size") c.batch_size = value.get<std::size_t>();
      else if (key == "epochs") c.epochs = value.get<std::size_t>();
      else if (key == "learning_rate") c.learning_rate = value.get<float>();
      else if (key == "tau") c.tau = value.get<float>();
      else if (key == "embedding_dim") c.embedding_dim = value.get<std::size_t>();
      else if (key == "predictor_hidden") c.predictor_hidden = value.get<std::size_t>();
      else if (key == "layers") c.layers = value.get<std::size_t>();
      else if (key == "eval_rounds") c.eval_rounds = value.get<std::size_t>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "threads") c.threads = value.get<std::size_t>();
      else if (key == "symmetric_roles") c.symmetric_roles = value.get<bool>();
      else if (key == "hops") c.view.hops = value.get<std::size_t>();
      else if (key == "subgraph_size") c.view.subgraph_size = value.get<std::size_t>();
      else if (key == "max_redraws") c.view.max_redraws = value.get<std::size_t>();
      else if (key == "feature_mask_prob") c.view.augment.feature_mask_prob = value.get<double>();
      else if (key == "hyperedge_drop_prob") c.view.augment.hyperedge_drop_prob = value.get<double>();
      else if (key == "alpha") c.weights.alpha = value.get<float>();
      else if (key == "beta") c.weights.beta = value.get<float>();
      else throw InvalidInput(fmt::format("unknown training config key '{}'", key));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(fmt::format("bad value for config key '{}': {}", key, e.what()));
    }
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(fmt::format("cannot open config '{}'", path.string()));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("config '{}' is not JSON: {}", path.string(), e.what()));
  }
  TrainConfig c;
  from_json(j, c);
  c.validate();
  return c;
}

RowVector pool_edge_context(const Matrix& context_rows) {
  if (context_rows.rows() == 0) throw InvalidInput("pool_edge_context: no target edges");
  return context_rows.cast<double>().colwise().mean().cast<float>();
}

double node_score(const ConstRowRef& target, const ConstRowRef& edge_context,
                 const ConstRowRef& hyper_summary, const ScoreWeights& w) {
  return (w.alpha + w.beta) - w.alpha * cosine_similarity(target, edge_context) -
         w.beta * cosine_similarity(target, hyper_summary);
}

std::vector<double> edge_scores(const Matrix& target_rows, const ConstRowRef& patch,
                               const ConstRowRef& graph_summary, const ScoreWeights& w) {
  std::vector<double> out(static_cast<std::size_t>(target_rows.rows()));
  for (Eigen::Index i = 0; i < target_rows.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = (w.alpha + w.beta) -
                                       w.alpha * cosine_similarity(target_rows.row(i), patch) -
                                       w.beta * cosine_similarity(target_rows.row(i), graph_summary);
  }
  return out;
}

namespace {

RowVector mean_rows(const Matrix& m, Eigen::Index begin, Eigen::Index count) {
  return m.middleRows(begin, count).cast<double>().colwise().mean().cast<float>();
}

// Stacked matrices and activations for one batch of views.
struct BatchState {
  std::vector<NodeId> nodes;  // local index -> global node
  Matrix inputs;              // gathered feature rows
  SparseMatrix graph_select, graph_prop, hyper_select, hyper_prop;
  BranchCache graph_cache, hyper_cache;
  PredictorCache predictor_cache;
  Matrix h, hbar, z;
  std::vector<Eigen::Index> graph_offset, hyper_offset;
};

SparseMatrix remap_columns(const std::vector<const SparseMatrix*>& maps,
                           const std::vector<NodeId>& nodes) {
  std::size_t rows = 0;
  for (const auto* m : maps) rows += m->rows();
  std::vector<Triplet> t;
  std::uint32_t base = 0;
  for (const auto* m : maps) {
    for (std::uint32_t r = 0; r < m->rows(); ++r) {
      const auto idx = m->row_indices(r);
      const auto val = m->row_values(r);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const auto local = std::lower_bound(nodes.begin(), nodes.end(), idx[i]) - nodes.begin();
        t.push_back({base + r, static_cast<std::uint32_t>(local), val[i]});
      }
    }
    base += static_cast<std::uint32_t>(m->rows());
  }
  return SparseMatrix::from_triplets(rows, nodes.size(), std::move(t));
}

BatchState forward(const std::vector<ViewPair>& views, const Matrix& x, const BourneModel& model,
                   bool keep_cache, bool hyper_cache) {
  BatchState s;
  for (const auto& v : views) {
    for (const auto* m : {&v.node_feature_map, &v.edge_feature_map}) {
      s.nodes.insert(s.nodes.end(), m->col_idx().begin(), m->col_idx().end());
    }
  }
  std::sort(s.nodes.begin(), s.nodes.end());
  s.nodes.erase(std::unique(s.nodes.begin(), s.nodes.end()), s.nodes.end());
  s.inputs.resize(static_cast<Eigen::Index>(s.nodes.size()), x.cols());
  for (std::size_t i = 0; i < s.nodes.size(); ++i) {
    s.inputs.row(static_cast<Eigen::Index>(i)) = x.row(s.nodes[i]);
  }

  std::vector<const SparseMatrix*> node_maps, edge_maps;
  std::vector<SparseMatrix> gprops, hprops;
  gprops.reserve(views.size());
  hprops.reserve(views.size());
  Eigen::Index og = 0, oe = 0;
  for (const auto& v : views) {
    node_maps.push_back(&v.node_feature_map);
    edge_maps.push_back(&v.edge_feature_map);
    gprops.push_back(gcn_propagation(v.adjacency));
    hprops.push_back(hypergraph_propagation(v.incidence));
    s.graph_offset.push_back(og);
    s.hyper_offset.push_back(oe);
    og += static_cast<Eigen::Index>(v.node_feature_map.rows());
    oe += static_cast<Eigen::Index>(v.edge_feature_map.rows());
  }
  std::vector<const SparseMatrix*> gp, hp;
  for (const auto& m : gprops) gp.push_back(&m);
  for (const auto& m : hprops) hp.push_back(&m);
  s.graph_select = remap_columns(node_maps, s.nodes);
  s.hyper_select = remap_columns(edge_maps, s.nodes);
  s.graph_prop = SparseMatrix::block_diagonal(gp);
  s.hyper_prop = SparseMatrix::block_diagonal(hp);

  s.h = branch_forward(s.graph_select, s.graph_prop, s.inputs, model.online.gcn_weights,
                       model.online.gcn_slopes, keep_cache ? &s.graph_cache : nullptr);
  s.hbar = predictor_forward(s.h, model.online, keep_cache ? &s.predictor_cache : nullptr);
  s.z = branch_forward(s.hyper_select, s.hyper_prop, s.inputs, model.target.hgnn_weights,
                       model.target.hgnn_slopes, hyper_cache ? &s.hyper_cache : nullptr);
  return s;
}

struct ViewEmbeddings {
  RowVector patch, target, graph_summary;
  RowVector edge_context, hyper_summary;
  Eigen::Index target_row_begin = 0;
};

ViewEmbeddings embeddings(const BatchState& s, const ViewPair& v, std::size_t i) {
  const auto og = s.graph_offset[i];
  const auto oe = s.hyper_offset[i];
  const auto ns = static_cast<Eigen::Index>(v.num_slots());
  const auto ms = static_cast<Eigen::Index>(v.num_dual_nodes());
  const auto mt = static_cast<Eigen::Index>(v.num_target_edges());
  ViewEmbeddings e;
  e.patch = s.hbar.row(og);
  e.target = s.hbar.row(og + ns);
  e.graph_summary = mean_rows(s.hbar, og, ns);
  e.edge_context = mean_rows(s.z, oe, mt);
  e.hyper_summary = mean_rows(s.z, oe, ms);
  e.target_row_begin = oe + ms;
  return e;
}

BatchScores score(const BatchState& s, const std::vector<ViewPair>& views, const ScoreWeights& w) {
  BatchScores out;
  double node_total = 0.0, edge_total = 0.0;
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto e = embeddings(s, views[i], i);
    const auto mt = static_cast<Eigen::Index>(views[i].num_target_edges());
    const double sn = node_score(e.target, e.edge_context, e.hyper_summary, w);
    auto se = edge_scores(s.z.middleRows(e.target_row_begin, mt), e.patch, e.graph_summary, w);
    double edge_mean = 0.0;
    for (double v : se) edge_mean += v;
    edge_mean /= static_cast<double>(se.size());
    node_total += sn;
    edge_total += edge_mean;
    out.node_scores.push_back(sn);
    out.edge_scores.push_back(std::move(se));
  }
  const auto b = static_cast<double>(views.size());
  out.loss = 0.5 * (node_total / b + edge_total / b);
  return out;
}

void backward(BatchState& s, const std::vector<ViewPair>& views, BourneModel& model,
              const ScoreWeights& w, bool symmetric_roles) {
  const auto b = static_cast<float>(views.size());
  Matrix d_hbar = Matrix::Zero(s.hbar.rows(), s.hbar.cols());
  Matrix d_z;
  if (symmetric_roles) d_z = Matrix::Zero(s.z.rows(), s.z.cols());
  for (std::size_t i = 0; i < views.size(); ++i) {
    const auto& v = views[i];
    const auto e = embeddings(s, v, i);
    const auto og = s.graph_offset[i];
    const auto ns = static_cast<Eigen::Index>(v.num_slots());
    const auto mt = static_cast<Eigen::Index>(v.num_target_edges());

    const float g_node = 0.5f / b;
    const auto c1 = cosine_similarity_backward(e.target, e.edge_context, -w.alpha * g_node);
    const auto c2 = cosine_similarity_backward(e.target, e.hyper_summary, -w.beta * g_node);
    d_hbar.row(og + ns) += c1.da + c2.da;

    const float g_edge = 0.5f / (b * static_cast<float>(mt));
    RowVector d_patch = RowVector::Zero(s.hbar.cols());
    RowVector d_summary = RowVector::Zero(s.hbar.cols());
    for (Eigen::Index r = 0; r < mt; ++r) {
      const auto row = e.target_row_begin + r;
      const auto p = cosine_similarity_backward(s.z.row(row), e.patch, -w.alpha * g_edge);
      const auto q = cosine_similarity_backward(s.z.row(row), e.graph_summary, -w.beta * g_edge);
      if (symmetric_roles) {
        d_z.row(row) += p.da + q.da;
      } else {
        d_patch += p.db;
        d_summary += q.db;
      }
    }
    if (!symmetric_roles) {
      d_hbar.row(og) += d_patch;
      d_summary /= static_cast<float>(ns);
      for (Eigen::Index r = 0; r < ns; ++r) d_hbar.row(og + r) += d_summary;
    }
  }
  const Matrix d_h = predictor_backward(s.h, model.online, s.predictor_cache, d_hbar);
  branch_backward(s.graph_select, s.graph_prop, s.inputs, model.online.gcn_weights,
                  model.online.gcn_slopes, s.graph_cache, d_h);
  if (symmetric_roles) {
    branch_backward(s.hyper_select, s.hyper_prop, s.inputs, model.target.hgnn_weights,
                    model.target.hgnn_slopes, s.hyper_cache, d_z);
  }
}

}  // namespace

BatchScores score_batch(const std::vector<ViewPair>& views, const Matrix& x, BourneModel& model,
                        const ScoreWeights& w, bool do_backward, bool symmetric_roles) {
  if (views.empty()) throw InvalidInput("score_batch: empty batch");
  auto state = forward(views, x, model, do_backward, do_backward && symmetric_roles);
  auto out = score(state, views, w);
  if (do_backward) {
    if (!std::isfinite(out.loss)) {
      throw NumericalError(fmt::format("non-finite batch loss {}", out.loss));
    }
    backward(state, views, model, w, symmetric_roles);
  }
  return out;
}

BatchScores score_batch(const std::vector<ViewPair>& views, const Matrix& x,
                        const BourneModel& model, const ScoreWeights& w) {
  if (views.empty()) throw InvalidInput("score_batch: empty batch");
  const auto state = forward(views, x, model, false, false);
  return score(state, views, w);
}

double batch_loss(const std::vector<ViewPair>& views, const Matrix& x, BourneModel& model,
                  const ScoreWeights& w) {
  return score_batch(views, x, model, w, true, false).loss;
}

std::vector<ViewPair> build_views(const AttributedGraph& graph, const std::vector<NodeId>& targets,
                                  const ViewConfig& cfg, std::uint64_t seed, Stream s,
                                  std::uint64_t round, std::size_t threads) {
  std::vector<ViewPair> views(targets.size());
  parallel_for(targets.size(), threads, [&](std::size_t i) {
    auto rng = make_rng({seed, stream(s), round, targets[i]});
    views[i] = build_view(graph, targets[i], cfg, rng);
  });
  return views;
}

TrainResult train(const AttributedGraph& graph, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  graph.validate();
  BourneModel model(cfg.model_config(graph.feature_dim()), cfg.seed);
  const AdamConfig adam_cfg{cfg.learning_rate};
  Adam online_opt(adam_cfg, model.online_parameters());
  std::optional<Adam> target_opt;
  if (cfg.symmetric_roles) target_opt.emplace(adam_cfg, model.target_parameters());

  TrainResult result;
  result.model = model;
  const auto& x = graph.features();
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    auto shuffle_rng = make_rng({cfg.seed, stream(Stream::kShuffle), epoch});
    const auto batches = epoch_batches(graph, cfg.batch_size, shuffle_rng);
    double weighted = 0.0;
    std::size_t count = 0;
    try {
      for (const auto& targets : batches) {
        const auto views =
            build_views(graph, targets, cfg.view, cfg.seed, Stream::kView, epoch, cfg.threads);
        const auto scores = score_batch(views, x, model, cfg.weights, true, cfg.symmetric_roles);
        online_opt.step();
        if (target_opt) {
          target_opt->step();
        } else {
          model.apply_ema(cfg.tau);
        }
        weighted += scores.loss * static_cast<double>(views.size());
        count += views.size();
      }
    } catch (const NumericalError& e) {
      result.halted = true;
      result.halt_reason = fmt::format("epoch {}: {}", epoch, e.what());
      break;
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.targets = count;
    entry.loss = weighted / static_cast<double>(std::max<std::size_t>(count, 1));
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (entry.loss < result.best_loss) {
      result.best_loss = entry.loss;
      result.best_epoch = epoch;
      result.model = model;
      result.optimizer = snapshot(online_opt);
    }
  }
  return result;
}

void save_model(const std::filesystem::path& path, const BourneModel& model,
                const TrainConfig& cfg, std::int64_t step,
                const std::optional<OptimizerSnapshot>& optimizer) {
  nlohmann::json extra;
  extra["train_config"] = cfg;
  extra["input_dim"] = model.config().input_dim;
  std::optional<OptimizerSnapshot> full;
  if (optimizer) {
    // Moments cover the online parameters; target entries are zero.
    full = *optimizer;
    for (const auto* p : const_cast<BourneModel&>(model).target_parameters()) {
      full->first_moments.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      full->second_moments.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    }
  }
  save_checkpoint(path, model.all_parameters(), step, cfg.tau, extra, full);
}

LoadedModel load_model(const std::filesystem::path& path) {
  auto data = load_checkpoint(path);
  LoadedModel out;
  try {
    from_json(data.extra.at("train_config"), out.config);
    const auto input_dim = data.extra.at("input_dim").get<std::size_t>();
    out.model = BourneModel(out.config.model_config(input_dim), out.config.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("checkpoint lacks model metadata: {}", e.what()));
  }
  auto params = out.model.all_parameters();
  if (params.size() != data.parameters.size()) {
    throw InvalidInput("checkpoint parameter count does not match its config");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& loaded = data.parameters[i];
    if (loaded.name != params[i]->name || loaded.value.rows() != params[i]->value.rows() ||
        loaded.value.cols() != params[i]->value.cols()) {
      throw InvalidInput(fmt::format("checkpoint parameter '{}' does not match the model",
                                     loaded.name));
    }
    params[i]->value = loaded.value;
  }
  out.step = data.step;
  return out;
}

ScoreTable::ScoreTable(std::size_t num_nodes, std::size_t num_edges)
    : node_sum_(num_nodes, 0.0),
      node_count_(num_nodes, 0),
      edge_sum_(num_edges, 0.0),
      edge_count_(num_edges, 0) {}

void ScoreTable::add_node(NodeId v, double score) {
  node_sum_.at(v) += score;
  ++node_count_[v];
}

void ScoreTable::add_edge(EdgeId e, double score) {
  edge_sum_.at(e) += score;
  ++edge_count_[e];
}

double ScoreTable::node_score(NodeId v) const {
  if (node_count_.at(v) == 0) return std::numeric_limits<double>::infinity();
  return node_sum_[v] / node_count_[v];
}

std::optional<double> ScoreTable::edge_score(EdgeId e) const {
  if (edge_count_.at(e) == 0) return std::nullopt;
  return edge_sum_[e] / edge_count_[e];
}

nlohmann::json ScoreTable::to_json() const {
  nlohmann::json j;
  auto& nodes = j["node_scores"] = nlohmann::json::array();
  for (NodeId v = 0; v < node_sum_.size(); ++v) {
    if (node_count_[v] == 0) nodes.push_back(nullptr);
    else nodes.push_back(node_score(v));
  }
  auto& edges = j["edge_scores"] = nlohmann::json::array();
  for (EdgeId e = 0; e < edge_sum_.size(); ++e) {
    const auto s = edge_score(e);
    if (s) edges.push_back(*s);
    else edges.push_back(nullptr);
  }
  j["skipped_isolated"] = skipped_isolated_;
  return j;
}

ScoreTable ScoreTable::from_json(const nlohmann::json& j) {
  try {
    const auto& nodes = j.at("node_scores");
    const auto& edges = j.at("edge_scores");
    ScoreTable t(nodes.size(), edges.size());
    for (NodeId v = 0; v < nodes.size(); ++v) {
      if (!nodes[v].is_null()) t.add_node(v, nodes[v].get<double>());
    }
    for (EdgeId e = 0; e < edges.size(); ++e) {
      if (!edges[e].is_null()) t.add_edge(e, edges[e].get<double>());
    }
    t.skipped_isolated_ = j.at("skipped_isolated").get<std::vector<NodeId>>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("malformed scores file: {}", e.what()));
  }
}

ScoreTable infer_scores(const AttributedGraph& graph, const BourneModel& model,
                        const InferenceConfig& cfg) {
  if (cfg.rounds == 0 || cfg.batch_size == 0) {
    throw InvalidInput("rounds and batch_size must be positive");
  }
  cfg.view.validate();
  cfg.weights.validate();
  ScoreTable table(graph.num_nodes(), graph.num_edges());
  std::vector<NodeId> targets;
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    if (graph.degree(v) == 0) table.mark_isolated(v);
    else targets.push_back(v);
  }
  const auto& x = graph.features();
  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    for (std::size_t begin = 0; begin < targets.size(); begin += cfg.batch_size) {
      const std::vector<NodeId> chunk(
          targets.begin() + static_cast<std::ptrdiff_t>(begin),
          targets.begin() + static_cast<std::ptrdiff_t>(std::min(targets.size(), begin + cfg.batch_size)));
      const auto views =
          build_views(graph, chunk, cfg.view, cfg.seed, Stream::kInference, round, cfg.threads);
      const auto scores = score_batch(views, x, model, cfg.weights);
      for (std::size_t i = 0; i < views.size(); ++i) {
        table.add_node(views[i].target, scores.node_scores[i]);
        for (std::size_t r = 0; r < views[i].target_edges.size(); ++r) {
          table.add_edge(views[i].target_edges[r], scores.edge_scores[i][r]);
        }
      }
    }
  }
  return table;
}

}  // namespace bourne
