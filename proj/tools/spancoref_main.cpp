// spancoref: coreference resolution by query-based span prediction.
//
// Subcommands: gen-synthetic, pretrain-mentions, pretrain-qa, train,
// predict, evaluate, recall-curve, speaker-ablation.
// Exit codes: 0 success, 1 usage/config error, 2 data error,
// 3 training divergence.

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "spancoref/config.hpp"
#include "spancoref/conll.hpp"
#include "spancoref/gap.hpp"
#include "spancoref/metrics.hpp"
#include "spancoref/qa_data.hpp"
#include "spancoref/resolver.hpp"
#include "spancoref/synthetic.hpp"

namespace fs = std::filesystem;
using namespace coref;

namespace {

struct CommonArgs {
  std::vector<std::string> config_files;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_files,
                  "Config file(s) with 'key = value' lines");
  cmd->add_option("--set", args.overrides,
                  "Override a config key, e.g. --set train.epochs=5");
}

RunConfig resolve_config(const CommonArgs& args) {
  return load_run_config(args.config_files, args.overrides);
}

std::vector<Document> load_conll_or_die(const std::string& path,
                                        const char* what) {
  if (path.empty())
    throw ConfigError(std::string("missing data path for ") + what);
  std::vector<std::string> warnings;
  auto docs = parse_conll(path, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return docs;
}

std::unique_ptr<CorefModel> fresh_model(const RunConfig& cfg,
                                        const std::vector<Document>& train,
                                        const std::vector<QaExample>* qa) {
  std::vector<std::string> words = Vocabulary::collect_words(train);
  if (qa) {
    for (const QaExample& ex : *qa) {
      for (const auto& t : simple_tokenize(ex.context)) words.push_back(t.text);
      for (const auto& t : simple_tokenize(ex.question)) words.push_back(t.text);
    }
  }
  Vocabulary vocab = Vocabulary::build(words, cfg.markers, cfg.vocab_max_size);
  return std::make_unique<CorefModel>(cfg.model, std::move(vocab));
}

void append_log(const std::string& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  out << line << "\n";
}

std::string jsonl_epoch(const char* stage, int epoch, int64_t step,
                        const EpochMetrics& m, double dev_f1 = -1.0) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(6);
  os << "{\"stage\":\"" << stage << "\",\"epoch\":" << epoch
     << ",\"step\":" << step << ",\"loss\":" << m.loss
     << ",\"linking_loss\":" << m.linking_loss
     << ",\"proposal_loss\":" << m.proposal_loss
     << ",\"mention_recall\":" << m.mention_recall
     << ",\"slate_accuracy\":" << m.slate_accuracy;
  if (dev_f1 >= 0) os << ",\"dev_avg_f1\":" << dev_f1;
  os << "}";
  return os.str();
}

int cmd_gen_synthetic(const std::string& out_path, int docs, int speakers,
                      int extra, uint64_t seed, const std::string& qa_out) {
  if (out_path.empty() && qa_out.empty())
    throw ConfigError("gen-synthetic needs --out and/or --qa-out");
  SyntheticConfig cfg;
  cfg.num_documents = docs;
  cfg.num_speakers = speakers;
  cfg.extra_sentences = extra;
  cfg.seed = seed;
  const auto corpus = generate_synthetic_corpus(cfg);
  std::vector<ClusterSet> gold;
  gold.reserve(corpus.size());
  for (const auto& d : corpus) gold.push_back(ClusterSet{d.gold_clusters});
  if (!out_path.empty()) {
    write_conll(corpus, gold, out_path);
    std::cout << "wrote " << corpus.size() << " documents to " << out_path
              << "\n";
  }
  if (!qa_out.empty()) {
    std::ofstream out(qa_out);
    out << generate_synthetic_qa_json(cfg);
    std::cout << "wrote QA fixture to " << qa_out << "\n";
  }
  return 0;
}

int cmd_pretrain_mentions(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(cfg.output_dir);
  cfg.echo(cfg.output_dir + "/config_resolved.cfg");

  const auto train = load_conll_or_die(cfg.train_path, "pretrain-mentions");
  auto model = fresh_model(cfg, train, nullptr);
  Resolver resolver(*model);
  nn::AdamOptimizer opt(model->store(), model->optimizer_groups());

  const std::string log = cfg.output_dir + "/train_log.jsonl";
  for (int e = 0; e < cfg.pretrain_epochs; ++e) {
    const auto m = resolver.pretrain_proposal_epoch(train, opt,
                                                    cfg.model.seed + e);
    append_log(log, jsonl_epoch("proposal", e, opt.step_count(), m));
    std::cout << "proposal epoch " << e << "  loss " << m.loss
              << "  recall " << m.mention_recall << "\n";
  }
  model->save(cfg.output_dir + "/proposal");
  opt.save_state(cfg.output_dir + "/proposal/optimizer.bin");

  if (!cfg.dev_path.empty()) {
    const auto dev = load_conll_or_die(cfg.dev_path, "dev");
    double recall = 0.0;
    for (const auto& doc : dev) {
      const auto build = resolver.score_document(doc);
      std::vector<Span> proposed, gold;
      for (const auto& ms : build.proposal.kept) proposed.push_back(ms.span);
      for (const auto& c : doc.gold_clusters)
        gold.insert(gold.end(), c.begin(), c.end());
      recall += mention_recall(gold, proposed);
    }
    if (!dev.empty()) recall /= static_cast<double>(dev.size());
    std::cout << "dev mention recall " << recall << "\n";
    append_log(log, "{\"stage\":\"proposal_dev\",\"recall\":" +
                        std::to_string(recall) + "}");
  }
  std::cout << "saved proposal checkpoint to " << cfg.output_dir
            << "/proposal\n";
  return 0;
}

int cmd_pretrain_qa(const CommonArgs& args, const std::string& init_dir) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(cfg.output_dir);
  cfg.echo(cfg.output_dir + "/config_resolved.cfg");

  if (cfg.qa_path.empty())
    throw ConfigError("pretrain-qa needs data.qa");
  const auto qa = parse_qa(cfg.qa_path);

  std::unique_ptr<CorefModel> model;
  if (!init_dir.empty()) {
    model = CorefModel::load(init_dir);
    model->set_runtime_config(cfg.model);
  } else {
    if (cfg.train_path.empty())
      throw ConfigError(
          "pretrain-qa needs either --init or data.train (for the vocabulary)");
    const auto train = load_conll_or_die(cfg.train_path, "pretrain-qa");
    model = fresh_model(cfg, train, &qa);
  }
  Resolver resolver(*model);
  nn::AdamOptimizer opt(model->store(), model->optimizer_groups());

  const std::string log = cfg.output_dir + "/train_log.jsonl";
  for (int e = 0; e < cfg.qa_epochs; ++e) {
    const auto m = resolver.qa_pretrain_epoch(qa, opt, cfg.model.seed + 1000 + e,
                                              cfg.qa_update_encoder);
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << "{\"stage\":\"qa\",\"epoch\":" << e << ",\"step\":" << opt.step_count()
       << ",\"loss\":" << m.loss << ",\"exact_match\":" << m.exact_match << "}";
    append_log(log, os.str());
    std::cout << "qa epoch " << e << "  loss " << m.loss << "  em "
              << m.exact_match << "\n";
  }
  model->save(cfg.output_dir + "/qa");
  opt.save_state(cfg.output_dir + "/qa/optimizer.bin");
  std::cout << "saved QA-pretrained checkpoint to " << cfg.output_dir
            << "/qa\n";
  return 0;
}

int cmd_train(const CommonArgs& args, const std::string& init_dir,
              const std::string& resume_dir, bool freeze_encoder) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(cfg.output_dir);
  cfg.echo(cfg.output_dir + "/config_resolved.cfg");

  const auto train = load_conll_or_die(cfg.train_path, "train");
  std::vector<Document> dev;
  if (!cfg.dev_path.empty()) dev = load_conll_or_die(cfg.dev_path, "dev");

  std::unique_ptr<CorefModel> model;
  if (!resume_dir.empty())
    model = CorefModel::load(resume_dir);
  else if (!init_dir.empty())
    model = CorefModel::load(init_dir);
  else
    model = fresh_model(cfg, train, nullptr);
  if (!resume_dir.empty() || !init_dir.empty())
    model->set_runtime_config(cfg.model);

  if (freeze_encoder || cfg.freeze_encoder)
    model->store().freeze_prefix("enc.", true);

  Resolver resolver(*model);
  nn::AdamOptimizer opt(model->store(), model->optimizer_groups());
  if (!resume_dir.empty() && fs::exists(resume_dir + "/optimizer.bin"))
    opt.load_state(resume_dir + "/optimizer.bin");

  const std::string log = cfg.output_dir + "/train_log.jsonl";
  double best_f1 = -1.0;
  for (int e = 0; e < cfg.epochs; ++e) {
    const auto m = resolver.train_epoch(train, opt, cfg.model.seed + 10000 + e);
    double dev_f1 = -1.0;
    if (!dev.empty() && (e + 1) % std::max(1, cfg.eval_every) == 0) {
      dev_f1 = resolver.evaluate(dev).conll_avg_f1;
      if (dev_f1 > best_f1) {
        best_f1 = dev_f1;
        model->save(cfg.output_dir + "/best");
      }
    }
    append_log(log, jsonl_epoch("joint", e, opt.step_count(), m, dev_f1));
    std::cout << "joint epoch " << e << "  loss " << m.loss << "  recall "
              << m.mention_recall << "  slate_acc " << m.slate_accuracy;
    if (dev_f1 >= 0) std::cout << "  dev_f1 " << dev_f1;
    std::cout << "\n";
  }
  model->save(cfg.output_dir + "/last");
  opt.save_state(cfg.output_dir + "/last/optimizer.bin");
  if (dev.empty()) model->save(cfg.output_dir + "/best");
  std::cout << "saved checkpoints under " << cfg.output_dir << "\n";
  return 0;
}

int cmd_predict(const std::string& checkpoint, const std::string& input,
                const std::string& output) {
  auto model = CorefModel::load(checkpoint);
  Resolver resolver(*model);
  const auto docs = load_conll_or_die(input, "predict");
  const auto preds = resolver.predict_all(docs);
  write_conll(docs, preds, output);
  std::cout << "wrote predictions for " << docs.size() << " documents to "
            << output << "\n";
  return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path,
                 const std::string& gap_path, const std::string& gap_pred_path,
                 const std::string& checkpoint, const std::string& report_path) {
  std::ostringstream report;
  if (!gold_path.empty()) {
    const auto gold_docs = load_conll_or_die(gold_path, "evaluate gold");
    const auto pred_docs = load_conll_or_die(pred_path, "evaluate pred");
    std::map<std::string, const Document*> pred_by_key;
    for (const auto& d : pred_docs) pred_by_key[d.doc_key] = &d;
    CorefEvaluator evaluator;
    for (const auto& gd : gold_docs) {
      auto it = pred_by_key.find(gd.doc_key);
      const Clusters empty;
      evaluator.add_document(gd.gold_clusters,
                             it != pred_by_key.end() ? it->second->gold_clusters
                                                     : empty);
    }
    const MetricReport r = evaluator.report();
    report << r.to_table();
    std::cout << r.to_table();
    if (!report_path.empty()) {
      std::ofstream out(report_path + ".jsonl");
      out << r.to_jsonl();
    }
  }
  if (!gap_path.empty()) {
    const auto examples = parse_gap(gap_path);
    std::map<std::string, GapPrediction> preds;
    if (!gap_pred_path.empty()) {
      std::ifstream in(gap_pred_path);
      if (!in) throw ParseError("cannot open GAP predictions: " + gap_pred_path);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty() || line.rfind("ID", 0) == 0) continue;
        std::istringstream ls(line);
        std::string id, a, b;
        ls >> id >> a >> b;
        preds[id] = {a == "TRUE" || a == "true" || a == "1",
                     b == "TRUE" || b == "true" || b == "1"};
      }
    } else if (!checkpoint.empty()) {
      auto model = CorefModel::load(checkpoint);
      Resolver resolver(*model);
      for (const auto& ex : examples) preds[ex.example_id] = resolver.predict_gap(ex);
    } else {
      throw ConfigError("GAP evaluation needs --gap-pred or --checkpoint");
    }
    std::vector<std::string> warnings;
    const GapReport r = gap_score(examples, preds, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    report << r.to_table();
    std::cout << r.to_table();
  }
  if (gold_path.empty() && gap_path.empty())
    throw ConfigError("evaluate needs --gold/--pred or --gap");
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << report.str();
  }
  return 0;
}

int cmd_recall_curve(const std::string& checkpoint, const std::string& data,
                     const std::string& lambdas_csv, const std::string& out_path) {
  auto model = CorefModel::load(checkpoint);
  const auto docs = load_conll_or_die(data, "recall-curve");

  std::vector<double> lambdas;
  std::istringstream ls(lambdas_csv);
  std::string item;
  while (std::getline(ls, item, ',')) lambdas.push_back(std::stod(item));
  if (lambdas.empty()) throw ConfigError("recall-curve needs --lambdas");

  std::ostringstream table;
  table << "keep_ratio\tproposal_recall\tpost_linking_recall\n";
  for (double lambda : lambdas) {
    // keep_ratio is a decode-time knob; rebuild around the same parameters.
    ModelConfig mc = model->config();
    mc.proposal.keep_ratio = lambda;
    CorefModel probe(mc, Vocabulary::load(checkpoint + "/vocab.txt"));
    probe.store().load_into(checkpoint + "/model.bin");

    Resolver resolver(probe);
    double prop_sum = 0.0, post_sum = 0.0;
    for (const auto& doc : docs) {
      const auto build = resolver.score_document(doc);
      std::vector<Span> proposed;
      for (const auto& ms : build.proposal.kept) proposed.push_back(ms.span);
      const ClusterSet decoded = decode_clusters(build.slates);
      std::vector<Span> recovered = proposed;
      for (const auto& cluster : decoded.clusters)
        recovered.insert(recovered.end(), cluster.begin(), cluster.end());
      std::vector<Span> gold;
      for (const auto& c : doc.gold_clusters)
        gold.insert(gold.end(), c.begin(), c.end());
      prop_sum += mention_recall(gold, proposed);
      post_sum += mention_recall(gold, recovered);
    }
    const double n = docs.empty() ? 1.0 : static_cast<double>(docs.size());
    std::ostringstream row;
    row.setf(std::ios::fixed);
    row.precision(4);
    row << lambda << "\t" << prop_sum / n << "\t" << post_sum / n << "\n";
    table << row.str();
  }
  std::cout << table.str();
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << table.str();
  }
  return 0;
}

int cmd_speaker_ablation(const CommonArgs& args) {
  RunConfig cfg = resolve_config(args);
  fs::create_directories(cfg.output_dir);
  cfg.echo(cfg.output_dir + "/config_resolved.cfg");

  const auto train = load_conll_or_die(cfg.train_path, "speaker-ablation");
  const auto dev = load_conll_or_die(cfg.dev_path, "speaker-ablation dev");

  auto speakers_of = [](const Document& d) {
    std::set<std::string> s;
    for (const auto& t : d.tokens)
      if (t.speaker) s.insert(*t.speaker);
    return static_cast<int>(s.size());
  };
  bool any_speakers = false;
  for (const auto& d : train)
    if (speakers_of(d) > 0) any_speakers = true;
  if (!any_speakers)
    throw ParseError("speaker-ablation: corpus has no speaker annotations");

  // Bucket index: 1..6 literal, 7 aggregates 7+.
  auto bucket_of = [&](const Document& d) {
    return std::min(7, std::max(1, speakers_of(d)));
  };

  std::ostringstream table;
  table << "bucket\tf1_speaker_as_input\tf1_speaker_as_feature\tdocs\n";
  std::map<int, std::array<double, 2>> bucket_f1;
  std::map<int, int> bucket_docs;
  for (int variant = 0; variant < 2; ++variant) {
    RunConfig vcfg = cfg;
    vcfg.model.speaker_strategy =
        variant == 0 ? SpeakerStrategy::input : SpeakerStrategy::feature;
    auto model = fresh_model(vcfg, train, nullptr);
    Resolver resolver(*model);
    nn::AdamOptimizer opt(model->store(), model->optimizer_groups());
    for (int e = 0; e < cfg.pretrain_epochs; ++e)
      resolver.pretrain_proposal_epoch(train, opt, vcfg.model.seed + e);
    for (int e = 0; e < cfg.epochs; ++e)
      resolver.train_epoch(train, opt, vcfg.model.seed + 10000 + e);

    std::map<int, std::vector<const Document*>> buckets;
    for (const auto& d : dev) buckets[bucket_of(d)].push_back(&d);
    for (const auto& [bucket, docs] : buckets) {
      CorefEvaluator evaluator;
      for (const Document* d : docs)
        evaluator.add_document(d->gold_clusters, resolver.predict(*d).clusters);
      const MetricReport r = evaluator.report();
      bucket_f1[bucket][variant] = r.conll_avg_f1;
      bucket_docs[bucket] = static_cast<int>(docs.size());
    }
  }
  table.setf(std::ios::fixed);
  table.precision(4);
  for (const auto& [bucket, f1s] : bucket_f1) {
    table << (bucket == 7 ? "7+" : std::to_string(bucket)) << "\t" << f1s[0]
          << "\t" << f1s[1] << "\t" << bucket_docs[bucket] << "\n";
  }
  std::cout << table.str();
  std::ofstream out(cfg.output_dir + "/speaker_ablation.tsv");
  out << table.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coreference resolution by query-based span prediction"};
  app.require_subcommand(1);

  // gen-synthetic
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "Generate a deterministic toy corpus");
  std::string gen_out, gen_qa_out;
  int gen_docs = 20, gen_speakers = 0, gen_extra = 2;
  uint64_t gen_seed = 7;
  gen->add_option("--out", gen_out, "Output CoNLL file");
  gen->add_option("--docs", gen_docs, "Number of documents");
  gen->add_option("--speakers", gen_speakers,
                  "Speakers per document (0 = narrative)");
  gen->add_option("--extra-sentences", gen_extra, "Extra sentences per doc");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--qa-out", gen_qa_out, "Also write a QA JSON fixture");

  CommonArgs pm_args, pq_args, tr_args, sa_args;
  auto* pm = app.add_subcommand("pretrain-mentions",
                                "Pretrain the mention proposal heads");
  add_common(pm, pm_args);

  auto* pq = app.add_subcommand("pretrain-qa",
                                "Pretrain the linking head on QA data");
  std::string pq_init;
  add_common(pq, pq_args);
  pq->add_option("--init", pq_init, "Checkpoint directory to start from");

  auto* tr = app.add_subcommand("train", "Joint end-to-end training");
  std::string tr_init, tr_resume;
  bool tr_freeze = false;
  add_common(tr, tr_args);
  tr->add_option("--init", tr_init, "Checkpoint directory to start from");
  tr->add_option("--resume", tr_resume,
                 "Checkpoint directory to resume (with optimizer state)");
  tr->add_flag("--freeze-encoder", tr_freeze, "Keep encoder parameters fixed");

  auto* pr = app.add_subcommand("predict", "Decode clusters for documents");
  std::string pr_ckpt, pr_in, pr_out;
  pr->add_option("--checkpoint", pr_ckpt, "Model checkpoint directory")
      ->required();
  pr->add_option("--input", pr_in, "Input CoNLL file")->required();
  pr->add_option("--output", pr_out, "Output CoNLL file")->required();

  auto* ev = app.add_subcommand("evaluate", "Score predictions");
  std::string ev_gold, ev_pred, ev_gap, ev_gap_pred, ev_ckpt, ev_report;
  ev->add_option("--gold", ev_gold, "Gold CoNLL file");
  ev->add_option("--pred", ev_pred, "Predicted CoNLL file");
  ev->add_option("--gap", ev_gap, "GAP gold TSV");
  ev->add_option("--gap-pred", ev_gap_pred,
                 "GAP predictions TSV (id, A, B booleans)");
  ev->add_option("--checkpoint", ev_ckpt,
                 "Model checkpoint (GAP predictions computed on the fly)");
  ev->add_option("--report", ev_report, "Write the report to this file");

  auto* rc = app.add_subcommand("recall-curve",
                                "Proposal vs post-linking recall per keep ratio");
  std::string rc_ckpt, rc_data, rc_lambdas = "0.1,0.2,0.3,0.4,0.5", rc_out;
  rc->add_option("--checkpoint", rc_ckpt, "Model checkpoint directory")
      ->required();
  rc->add_option("--data", rc_data, "CoNLL file to measure on")->required();
  rc->add_option("--lambdas", rc_lambdas, "Comma-separated keep ratios");
  rc->add_option("--out", rc_out, "Write the table to this file");

  auto* sa = app.add_subcommand(
      "speaker-ablation", "Compare speaker strategies, bucketed by speaker count");
  add_common(sa, sa_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (gen->parsed())
      return cmd_gen_synthetic(gen_out, gen_docs, gen_speakers, gen_extra,
                               gen_seed, gen_qa_out);
    if (pm->parsed()) return cmd_pretrain_mentions(pm_args);
    if (pq->parsed()) return cmd_pretrain_qa(pq_args, pq_init);
    if (tr->parsed()) return cmd_train(tr_args, tr_init, tr_resume, tr_freeze);
    if (pr->parsed()) return cmd_predict(pr_ckpt, pr_in, pr_out);
    if (ev->parsed())
      return cmd_evaluate(ev_gold, ev_pred, ev_gap, ev_gap_pred, ev_ckpt,
                          ev_report);
    if (rc->parsed()) return cmd_recall_curve(rc_ckpt, rc_data, rc_lambdas, rc_out);
    if (sa->parsed()) return cmd_speaker_ablation(sa_args);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "training diverged: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
