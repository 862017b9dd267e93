#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <fmt/os.h>

#include "CLI11.hpp"
#include "bourne/dataset.hpp"
#include "bourne/errors.hpp"
#include "bourne/experiments.hpp"
#include "bourne/injection.hpp"
#include "bourne/random.hpp"
#include "bourne/synthetic.hpp"
#include "bourne/trainer.hpp"
#include "bourne/view.hpp"

namespace fs = std::filesystem;
using namespace bourne;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string config;
  std::string dump_views;
  bool symmetric_roles = false;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput(fmt::format("cannot open '{}'", path.string()));
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(fmt::format("'{}' is not JSON: {}", path.string(), e.what()));
  }
}

AttributedGraph load(const std::string& dir) {
  auto loaded = load_dataset(dir);
  for (const auto& w : loaded.warnings) fmt::print(stderr, "warning: {}\n", w);
  return std::move(loaded.graph);
}

// Config file first, then global overrides.
TrainConfig train_config(const Globals& g) {
  TrainConfig cfg;
  if (!g.config.empty()) cfg = load_train_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  if (g.symmetric_roles) cfg.symmetric_roles = true;
  cfg.validate();
  return cfg;
}

void dump_matrix(const fs::path& path, const Matrix& m) {
  auto out = fmt::output_file(path.string());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out.print(",");
      out.print("{}", m(r, c));
    }
    out.print("\n");
  }
}

void dump_view(const Globals& g, const AttributedGraph& graph, const TrainConfig& cfg) {
  if (g.dump_views.empty()) return;
  NodeId target = 0;
  while (target < graph.num_nodes() && graph.degree(target) == 0) ++target;
  if (target == graph.num_nodes()) throw InvalidInput("no non-isolated node to dump");
  auto rng = make_rng({cfg.seed, stream(Stream::kView), 0, target});
  const auto view = build_view(graph, target, cfg.view, rng);
  const fs::path dir = g.dump_views;
  fs::create_directories(dir);
  dump_matrix(dir / "adjacency.csv", view.adjacency.to_dense());
  dump_matrix(dir / "incidence.csv", view.incidence.to_dense());
  dump_matrix(dir / "node_features.csv", view.node_features(graph.features()));
  dump_matrix(dir / "edge_features.csv", view.edge_features(graph.features()));
  write_text(dir / "view.json", nlohmann::json{{"target", view.target},
                                               {"slot_nodes", view.slot_nodes},
                                               {"target_edges", view.target_edges},
                                               {"dual_edge_ids", view.dual_edge_ids}}
                                    .dump(2));
  fmt::print(stderr, "dumped view of node {} to {}\n", target, dir.string());
}

template <typename T>
std::vector<T> parse_list(const std::string& text) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= text.size() && !text.empty()) {
    const auto comma = text.find(',', pos);
    const auto item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      if constexpr (std::is_floating_point_v<T>) out.push_back(static_cast<T>(std::stod(item)));
      else out.push_back(static_cast<T>(std::stoull(item)));
    } catch (const std::exception&) {
      throw InvalidInput(fmt::format("bad list entry '{}'", item));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

nlohmann::json injection_summary(const AttributedGraph& graph, const InjectionReport& report,
                                 const nlohmann::json& config) {
  const auto c = anomaly_correlation(graph);
  return {{"config", config},
          {"injected_node_ids", report.injected_node_ids},
          {"injected_edge_ids", report.injected_edge_ids},
          {"structural_nodes", report.structural_nodes},
          {"structural_edges", report.structural_edges},
          {"attributive_nodes", report.attributive_nodes},
          {"attributive_edges", report.attributive_edges},
          {"anomalous_nodes", std::count(graph.node_labels()->begin(), graph.node_labels()->end(), 1)},
          {"anomalous_edges", std::count(graph.edge_labels()->begin(), graph.edge_labels()->end(), 1)},
          {"achieved_c_ano", c.value},
          {"zero_degree_anomalies", c.zero_degree_anomalies}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Node and edge anomaly detection on attributed graphs"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Random seed (overrides config)");
  app.add_option("--threads", g.threads, "Worker threads for view construction");
  app.add_option("--config", g.config, "Training config JSON");
  app.add_option("--dump-views", g.dump_views, "Write one sampled view as CSV matrices here");
  app.add_flag("--symmetric-roles", g.symmetric_roles,
               "Train the node term on the graph side and the edge term on the hypergraph side");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate an Erdos-Renyi graph with Gaussian features");
  SyntheticConfig sc;
  std::string synth_out;
  synth->add_option("--nodes", sc.num_nodes)->capture_default_str();
  synth->add_option("--edge-prob", sc.edge_prob)->capture_default_str();
  synth->add_option("--dim", sc.feature_dim)->capture_default_str();
  synth->add_option("--smoothing-rounds", sc.smoothing_rounds)->capture_default_str();
  synth->add_option("--smoothing-weight", sc.smoothing_weight)->capture_default_str();
  synth->add_option("--out", synth_out)->required();

  // inject
  auto* inject = app.add_subcommand("inject", "Plant structural and attributive anomalies");
  InjectionConfig ic;
  std::string inject_data, inject_out, inject_base = "attributive";
  std::optional<double> correlation;
  inject->add_option("--data", inject_data)->required();
  inject->add_option("--out", inject_out)->required();
  inject->add_option("--clique-size", ic.clique_size)->capture_default_str();
  inject->add_option("--clique-count", ic.clique_count)->capture_default_str();
  inject->add_option("--candidates", ic.candidate_pool)->capture_default_str();
  inject->add_option("--attr-edges", ic.attr_edge_count)->capture_default_str();
  inject->add_option("--correlation", correlation, "Target anomaly correlation level in [0,1]");
  inject->add_option("--base", inject_base, "Base pass for --correlation")
      ->check(CLI::IsMember({"attributive", "structural"}));

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model");
  std::string train_data, train_out, train_log;
  std::optional<std::size_t> train_epochs;
  train_cmd->add_option("--data", train_data)->required();
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_log, "JSON-lines log path (default: stdout)");
  train_cmd->add_option("--epochs", train_epochs, "Override epoch count");

  // score
  auto* score_cmd = app.add_subcommand("score", "Score nodes and edges with a checkpoint");
  std::string score_ckpt, score_data, score_out;
  std::optional<std::size_t> score_rounds;
  score_cmd->add_option("--ckpt", score_ckpt)->required();
  score_cmd->add_option("--data", score_data)->required();
  score_cmd->add_option("--rounds", score_rounds, "Evaluation rounds (default: checkpoint config)");
  score_cmd->add_option("--out", score_out)->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate scores against labels");
  std::string eval_data, eval_scores, eval_out, eval_roc;
  std::optional<std::size_t> eval_k;
  eval_cmd->add_option("--data", eval_data)->required();
  eval_cmd->add_option("--scores", eval_scores)->required();
  eval_cmd->add_option("--out", eval_out, "Report JSON path")->required();
  eval_cmd->add_option("--k", eval_k, "Extra cutoff for precision/recall");
  eval_cmd->add_option("--roc-csv", eval_roc, "Prefix for ROC point CSV files");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Hyperparameter grid on a labeled dataset");
  std::string sweep_data, sweep_out, sweep_cache, s_alpha, s_beta, s_dim, s_rounds, s_tau;
  sweep_cmd->add_option("--data", sweep_data)->required();
  sweep_cmd->add_option("--out", sweep_out, "CSV path")->required();
  sweep_cmd->add_option("--cache", sweep_cache, "Per-cell result cache directory");
  sweep_cmd->add_option("--alpha", s_alpha, "Comma-separated values");
  sweep_cmd->add_option("--beta", s_beta);
  sweep_cmd->add_option("--dim", s_dim);
  sweep_cmd->add_option("--rounds", s_rounds);
  sweep_cmd->add_option("--tau", s_tau);

  // correlation-sweep
  auto* corr_cmd = app.add_subcommand("correlation-sweep",
                                      "Inject at several anomaly-correlation levels and evaluate");
  std::string corr_data, corr_out, corr_levels = "0,0.25,0.5,0.75,1", corr_base = "attributive";
  InjectionConfig corr_ic;
  corr_cmd->add_option("--data", corr_data, "Unlabeled base graph")->required();
  corr_cmd->add_option("--out", corr_out, "CSV path")->required();
  corr_cmd->add_option("--levels", corr_levels)->capture_default_str();
  corr_cmd->add_option("--base", corr_base)->check(CLI::IsMember({"attributive", "structural"}));
  corr_cmd->add_option("--clique-size", corr_ic.clique_size)->capture_default_str();
  corr_cmd->add_option("--clique-count", corr_ic.clique_count)->capture_default_str();
  corr_cmd->add_option("--candidates", corr_ic.candidate_pool)->capture_default_str();
  corr_cmd->add_option("--attr-edges", corr_ic.attr_edge_count)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      sc.seed = g.seed.value_or(0);
      save_dataset(erdos_renyi_graph(sc), synth_out);
    } else if (*inject) {
      ic.rng_seed = g.seed.value_or(0);
      const auto graph = load(inject_data);
      nlohmann::json config = {{"clique_size", ic.clique_size},
                               {"clique_count", ic.clique_count},
                               {"candidate_pool", ic.candidate_pool},
                               {"attr_edge_count", ic.attr_edge_count},
                               {"rng_seed", ic.rng_seed}};
      InjectionResult result;
      if (correlation) {
        const auto base = inject_base == "structural" ? SweepBase::kStructural
                                                      : SweepBase::kAttributive;
        config["correlation"] = *correlation;
        config["base"] = inject_base;
        result = inject_correlated(graph, {ic, base, *correlation});
      } else {
        result = inject_anomalies(graph, ic);
      }
      save_dataset(result.graph, inject_out);
      write_text(fs::path(inject_out) / "injection_report.json",
                 injection_summary(result.graph, result.report, config).dump(2) + "\n");
    } else if (*train_cmd) {
      auto cfg = train_config(g);
      if (train_epochs) cfg.epochs = *train_epochs;
      cfg.validate();
      const auto graph = load(train_data);
      dump_view(g, graph, cfg);
      std::optional<fmt::ostream> log_file;
      if (!train_log.empty()) log_file.emplace(fmt::output_file(train_log));
      const auto result = train(graph, cfg, [&](const EpochLog& e) {
        const auto line = nlohmann::json{{"epoch", e.epoch},
                                         {"loss", e.loss},
                                         {"wall_time", e.seconds},
                                         {"targets", e.targets}}
                              .dump();
        if (log_file) log_file->print("{}\n", line);
        else fmt::print("{}\n", line);
      });
      const auto step = result.optimizer ? result.optimizer->step : 0;
      save_model(train_out, result.model, cfg, step, result.optimizer);
      if (!result.log.empty()) {
        fmt::print(stderr, "best epoch {} loss {:.6f}\n", result.best_epoch, result.best_loss);
      }
      if (result.halted) {
        fmt::print(stderr, "error: training halted ({}); {}\n", result.halt_reason,
                   result.log.empty() ? "wrote the initial parameters"
                                      : "kept the last good checkpoint");
        return 3;
      }
    } else if (*score_cmd) {
      const auto loaded = load_model(score_ckpt);
      auto cfg = loaded.config;
      if (g.seed) cfg.seed = *g.seed;
      if (g.threads) cfg.threads = *g.threads;
      if (score_rounds) cfg.eval_rounds = *score_rounds;
      const auto graph = load(score_data);
      if (graph.feature_dim() != loaded.model.config().input_dim) {
        throw InvalidInput("dataset feature dimension does not match the checkpoint");
      }
      dump_view(g, graph, cfg);
      const auto table = infer_scores(graph, loaded.model, inference_config(cfg));
      if (!table.skipped_isolated().empty()) {
        fmt::print(stderr, "warning: {} isolated nodes left unscored\n",
                   table.skipped_isolated().size());
      }
      write_text(score_out, table.to_json().dump() + "\n");
    } else if (*eval_cmd) {
      const auto graph = load(eval_data);
      const auto table = ScoreTable::from_json(read_json(eval_scores));
      const auto result = evaluate_scores(graph, table, eval_k,
                                          {{"data", eval_data}, {"scores", eval_scores}});
      fmt::print("{}\n{}\n", result.node.summary_line(), result.edge.summary_line());
      write_text(eval_out, nlohmann::json{{"node", result.node}, {"edge", result.edge}}.dump(2) +
                               "\n");
      if (!eval_roc.empty()) {
        for (const auto* r : {&result.node, &result.edge}) {
          std::string csv = "fpr,tpr\n";
          for (const auto& p : r->roc_points) csv += fmt::format("{},{}\n", p.fpr, p.tpr);
          write_text(fmt::format("{}_{}.csv", eval_roc, r->task), csv);
        }
      }
    } else if (*sweep_cmd) {
      const auto cfg = train_config(g);
      const auto graph = load(sweep_data);
      SweepGrid grid;
      grid.alpha = parse_list<float>(s_alpha);
      grid.beta = parse_list<float>(s_beta);
      grid.embedding_dim = parse_list<std::size_t>(s_dim);
      grid.rounds = parse_list<std::size_t>(s_rounds);
      grid.tau = parse_list<float>(s_tau);
      const auto result = run_hyperparameter_sweep(graph, cfg, grid, sweep_cache);
      write_text(sweep_out, sweep_csv(result));
      fmt::print(stderr, "{} cells, {} trained\n", result.rows.size(), result.trained_cells);
    } else if (*corr_cmd) {
      CorrelationSweepConfig cc;
      cc.train = train_config(g);
      cc.levels = parse_list<double>(corr_levels);
      cc.base = corr_base == "structural" ? SweepBase::kStructural : SweepBase::kAttributive;
      cc.injection = corr_ic;
      cc.injection.rng_seed = cc.train.seed;
      auto graph = load(corr_data);
      graph.clear_labels();
      const auto rows = run_correlation_sweep(graph, cc);
      write_text(corr_out, correlation_csv(rows));
      fmt::print("{}", correlation_csv(rows));
    }
  } catch (const InvalidInput& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    fmt::print(stderr, "numerical error: {}\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
