// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "amped/checkpoint.hpp"
#include "amped/config.hpp"
#include "amped/edge_eval.hpp"
#include "amped/flops.hpp"
#include "amped/log.hpp"
#include "amped/pnm.hpp"
#include "amped/sed.hpp"
#include "amped/synthetic.hpp"
#include "amped/trainer.hpp"
#include "amped/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace amped;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

fs::path ensure_out(const std::string& out) {
  if (out.empty()) throw std::runtime_error("--out is required");
  fs::path p(out);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

// Every command drops one of these next to its outputs; rerunning with the
// same build and inputs reproduces the outputs byte for byte.
json manifest_base(const std::string& command, const RunConfig& rc, std::uint64_t seed,
                   int jobs) {
  json cfg = run_config_to_json(rc);
  return json{{"command", command},
              {"version", kVersion},
              {"seed", seed},
              {"jobs", jobs},
              {"config", cfg},
              {"config_hash", hex64(fnv1a64(cfg.dump()))}};
}

void write_manifest(const fs::path& out, const json& m) {
  write_text(out / "run-manifest.json", m.dump(2) + "\n");
}

RunConfig load_cfg_or_default(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return load_run_config(path);
}

struct LoadedModel {
  SedConfig cfg;
  Checkpoint ck;
};

SedModel<float> restore_model(const Checkpoint& ck, const SedConfig& cfg) {
  require_structure_match(ck.config, cfg);
  SedModel<float> model(cfg);
  assign_params(model.params(), ck.params);
  return model;
}

std::vector<std::vector<double>> parse_schedules(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    std::string clean;
    for (char c : group)
      if (c != '[' && c != ']' && c != ' ') clean.push_back(c);
    if (clean.empty()) continue;
    std::vector<double> alphas;
    std::stringstream vals(clean);
    std::string v;
    while (std::getline(vals, v, ',')) alphas.push_back(std::stod(v));
    out.push_back(std::move(alphas));
  }
  if (out.empty()) throw std::runtime_error("--schedules: no threshold lists given");
  return out;
}

std::string fmt_schedule(const std::vector<double>& alphas) {
  std::string s = "[";
  for (size_t i = 0; i < alphas.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", alphas[i]);
    s += (i ? "," : "") + std::string(buf);
  }
  return s + "]";
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream vals(text);
  std::string v;
  while (std::getline(vals, v, ',')) out.push_back(std::stod(v));
  return out;
}

struct SplitData {
  std::vector<std::string> ids;
  std::vector<MatF> images;
  std::vector<GroundTruthSet> gts;
};

SplitData load_split(const std::string& root, const std::string& split, int limit) {
  DatasetSplit ds = read_dataset(root, split);
  SplitData out;
  for (const DatasetEntry& e : ds.entries) {
    if (limit > 0 && static_cast<int>(out.ids.size()) >= limit) break;
    LoadedSample s = load_sample(e);
    out.ids.push_back(e.id);
    out.images.push_back(std::move(s.image));
    out.gts.push_back(std::move(s.gt));
  }
  if (out.ids.empty()) throw std::runtime_error("dataset split '" + split + "' is empty");
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_gen_data(const std::string& config, const std::string& out, std::uint64_t seed) {
  RunConfig rc = load_cfg_or_default(config);
  fs::path outp = ensure_out(out);
  write_dataset(outp.string(), rc.data.synth, rc.data.train_count, rc.data.test_count, seed);
  json m = manifest_base("gen-data", rc, seed, 1);
  m["outputs"] = {"manifest.json", "train", "test"};
  write_manifest(outp, m);
  log_info("wrote " + std::to_string(rc.data.train_count) + "+" +
           std::to_string(rc.data.test_count) + " samples to " + outp.string());
  return 0;
}

int cmd_train(const std::string& config, const std::string& data, const std::string& out,
              std::uint64_t seed, const std::string& resume) {
  RunConfig rc = load_cfg_or_default(config);
  const std::string root = data.empty() ? rc.data.root : data;
  fs::path outp = ensure_out(out);

  SplitData split = load_split(root, "train", 0);
  std::vector<TrainSample<float>> samples;
  for (size_t i = 0; i < split.ids.size(); ++i)
    samples.push_back(make_train_sample<float>(split.images[i], split.gts[i], rc.model));

  SedModel<float> model(rc.model);
  model.init_weights(seed);
  if (!resume.empty()) {
    Checkpoint ck = load_checkpoint(resume);
    require_structure_match(ck.config, rc.model);
    assign_params(model.params(), ck.params);
  }

  std::ofstream jsonl(outp / "train-log.jsonl", std::ios::binary | std::ios::trunc);
  Trainer trainer(model, rc.train, seed);
  TrainResult res = trainer.run(samples, &jsonl, (outp / "snap").string());
  save_checkpoint((outp / "model.ckpt").string(), rc.model, model.params());

  json m = manifest_base("train", rc, seed, 1);
  m["data"] = root;
  m["resume"] = resume;
  m["iterations"] = res.iterations;
  m["first_loss"] = res.first_loss;
  m["last_loss"] = res.last_loss;
  m["outputs"] = {"model.ckpt", "train-log.jsonl"};
  write_manifest(outp, m);
  log_info("trained " + std::to_string(res.iterations) + " iterations, final loss " +
           std::to_string(res.last_loss));
  return 0;
}

json trace_json(const ForwardTrace<float>& tr, std::uint64_t macs) {
  json stages = json::array();
  for (const StageTrace<float>& st : tr.stages)
    stages.push_back({{"layer", st.layer},
                      {"alpha", st.alpha},
                      {"enter_tokens", st.enter_tokens},
                      {"kept_tokens", st.kept_tokens},
                      {"fallback", st.fallback}});
  return json{{"macs", macs}, {"layer_tokens", tr.layer_tokens}, {"stages", stages}};
}

int cmd_infer(const std::string& checkpoint, const std::vector<std::string>& images,
              const std::string& data, const std::string& split, int limit,
              const std::string& out, bool no_prune) {
  if (checkpoint.empty()) throw std::runtime_error("--checkpoint is required");
  Checkpoint ck = load_checkpoint(checkpoint);
  SedConfig cfg = ck.config;
  if (no_prune) cfg.pruning_enabled = false;
  SedModel<float> model = restore_model(ck, cfg);
  fs::path outp = ensure_out(out);

  std::vector<std::string> ids;
  std::vector<MatF> inputs;
  if (!images.empty()) {
    for (const std::string& path : images) {
      ids.push_back(fs::path(path).stem().string());
      inputs.push_back(to_gray_unit(read_pnm(path)));
    }
  } else if (!data.empty()) {
    SplitData sd = load_split(data, split, limit);
    ids = std::move(sd.ids);
    inputs = std::move(sd.images);
  } else {
    throw std::runtime_error("give image paths or --data DIR");
  }

  json listed = json::array();
  for (size_t i = 0; i < ids.size(); ++i) {
    ForwardTrace<float> tr;
    std::uint64_t macs = 0;
    EdgeMap<float> em = model.infer(inputs[i], &tr, &macs);
    write_pnm(from_gray_unit(em.prob, 65535), (outp / (ids[i] + ".edge.pgm")).string());
    write_text(outp / (ids[i] + ".trace.json"), trace_json(tr, macs).dump(2) + "\n");
    listed.push_back(ids[i]);
  }

  RunConfig rc;
  rc.model = cfg;
  json m = manifest_base("infer", rc, 0, 1);
  m["checkpoint"] = checkpoint;
  m["images"] = listed;
  write_manifest(outp, m);
  return 0;
}

int cmd_eval(const std::string& pred, const std::string& data, const std::string& split,
             const std::string& out, double tolerance, int jobs, int limit) {
  if (pred.empty()) throw std::runtime_error("--pred is required");
  if (data.empty()) throw std::runtime_error("--data is required");
  fs::path outp = ensure_out(out);
  SplitData sd = load_split(data, split, limit);

  std::vector<MatF> maps;
  for (const std::string& id : sd.ids) {
    fs::path p = fs::path(pred) / (id + ".edge.pgm");
    if (!fs::exists(p)) p = fs::path(pred) / (id + ".pgm");
    if (!fs::exists(p)) throw std::runtime_error("no prediction for id " + id + " under " + pred);
    maps.push_back(to_gray_unit(read_pnm(p.string())));
  }

  EvalResult r = evaluate_maps(maps, sd.gts, tolerance, default_thresholds(), jobs);

  json summary = {{"ods", r.ods},          {"ods_threshold", r.ods_threshold},
                  {"ois", r.ois},          {"ap", r.ap},
                  {"tolerance", tolerance}, {"images", sd.ids.size()}};
  write_text(outp / "eval-summary.json", summary.dump(2) + "\n");

  std::string csv = "threshold,precision,recall,f1\n";
  for (const PrPoint& pt : r.curve) {
    char line[128];
    std::snprintf(line, sizeof(line), "%g,%.6f,%.6f,%.6f\n", pt.threshold, pt.precision,
                  pt.recall, pt.f1);
    csv += line;
  }
  write_text(outp / "pr-curve.csv", csv);

  RunConfig rc;
  rc.eval.tolerance = tolerance;
  json m = manifest_base("eval", rc, 0, jobs);
  m["pred"] = pred;
  m["data"] = data;
  m["split"] = split;
  m["outputs"] = {"eval-summary.json", "pr-curve.csv"};
  write_manifest(outp, m);
  log_info("ODS " + std::to_string(r.ods) + " OIS " + std::to_string(r.ois) + " AP " +
           std::to_string(r.ap));
  return 0;
}

int cmd_flops(const std::string& config, const std::string& arch_name, const std::string& keep,
              const std::string& out) {
  RunConfig rc = load_cfg_or_default(config);
  ArchSpec arch;
  if (arch_name == "vit-b")
    arch = ArchSpec::vit_b();
  else if (arch_name == "vit-l")
    arch = ArchSpec::vit_l();
  else if (arch_name == "config")
    arch = ArchSpec::from_config(rc.model);
  else
    throw std::runtime_error("--arch must be vit-b, vit-l or config");

  RetentionProfile profile = keep.empty()
                                 ? RetentionProfile::full(arch)
                                 : RetentionProfile::from_fractions(arch, parse_fractions(keep));
  ReductionReport rep = reduction_report(arch, RetentionProfile::full(arch), profile);

  fs::path outp = ensure_out(out);
  write_text(outp / "flop-report.csv", report_csv(rep));
  write_text(outp / "flop-report.json", report_json(rep));

  json m = manifest_base("flops", rc, 0, 1);
  m["arch"] = arch_name;
  m["keep"] = keep;
  m["outputs"] = {"flop-report.csv", "flop-report.json"};
  write_manifest(outp, m);
  log_info(arch.name + ": " + std::to_string(rep.pruned.gmacs()) + " GMACs, reduction " +
           std::to_string(rep.reduction_pct) + "%");
  return 0;
}

int cmd_prune_sweep(const std::string& checkpoint, const std::string& data,
                    const std::string& split, const std::string& schedules_text,
                    const std::string& out, double tolerance, int jobs, int limit) {
  if (checkpoint.empty()) throw std::runtime_error("--checkpoint is required");
  if (data.empty()) throw std::runtime_error("--data is required");
  Checkpoint ck = load_checkpoint(checkpoint);
  const size_t n_stages = ck.config.schedule.stages.size();
  if (n_stages == 0) throw std::runtime_error("checkpoint has no pruning stages to sweep");

  std::vector<std::vector<double>> schedules = parse_schedules(schedules_text);
  for (const auto& s : schedules)
    if (s.size() != n_stages)
      throw std::runtime_error("schedule " + fmt_schedule(s) + " has " +
                               std::to_string(s.size()) + " thresholds, model has " +
                               std::to_string(n_stages) + " stages");

  fs::path outp = ensure_out(out);
  SplitData sd = load_split(data, split, limit);

  struct Row {
    std::string label;
    double ods = 0, ois = 0;
    double mean_macs = 0;
    double reduction_pct = 0;
  };
  std::vector<Row> rows;

  auto run_one = [&](const SedConfig& cfg, const std::string& label) {
    SedModel<float> model = restore_model(ck, cfg);
    std::vector<MatF> maps;
    double macs_sum = 0;
    for (const MatF& img : sd.images) {
      std::uint64_t macs = 0;
      EdgeMap<float> em = model.infer(img, nullptr, &macs);
      macs_sum += static_cast<double>(macs);
      maps.push_back(std::move(em.prob));
    }
    EvalResult r = evaluate_maps(maps, sd.gts, tolerance, default_thresholds(), jobs);
    Row row;
    row.label = label;
    row.ods = r.ods;
    row.ois = r.ois;
    row.mean_macs = macs_sum / static_cast<double>(sd.images.size());
    return row;
  };

  SedConfig base_cfg = ck.config;
  base_cfg.pruning_enabled = false;
  rows.push_back(run_one(base_cfg, "none"));
  const double base_macs = rows[0].mean_macs;

  for (const auto& alphas : schedules) {
    SedConfig cfg = ck.config;
    cfg.pruning_enabled = true;
    for (size_t i = 0; i < n_stages; ++i) cfg.schedule.stages[i].alpha = alphas[i];
    cfg.validate();
    Row row = run_one(cfg, fmt_schedule(alphas));
    row.reduction_pct = 100.0 * (1.0 - row.mean_macs / base_macs);
    rows.push_back(row);
  }

  std::string csv = "schedule,ods,ois,macs,reduction_pct\n";
  for (const Row& r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.0f,%.2f\n", r.label.c_str(), r.ods, r.ois,
                  r.mean_macs, r.reduction_pct);
    csv += line;
  }
  write_text(outp / "prune-sweep.csv", csv);

  RunConfig rc;
  rc.model = ck.config;
  rc.eval.tolerance = tolerance;
  json m = manifest_base("prune-sweep", rc, 0, jobs);
  m["checkpoint"] = checkpoint;
  m["data"] = data;
  m["split"] = split;
  m["schedules"] = schedules_text;
  m["outputs"] = {"prune-sweep.csv"};
  write_manifest(outp, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streamlined edge detection with multi-stage token pruning"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config, checkpoint, out, data, pred, resume, split = "test";
  std::string schedules, arch = "config", keep;
  std::vector<std::string> images;
  std::uint64_t seed = 0;
  int jobs = 1, limit = 0;
  double tolerance = 0.0075;
  bool no_prune = false;

  std::function<int()> action;

  CLI::App* gen = app.add_subcommand("gen-data", "Write a synthetic edge dataset");
  gen->add_option("--config", config, "Run config JSON");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--seed", seed, "Generator seed");
  gen->callback([&] { action = [&] { return cmd_gen_data(config, out, seed); }; });

  CLI::App* tr = app.add_subcommand("train", "Train a model on a generated dataset");
  tr->add_option("--config", config, "Run config JSON");
  tr->add_option("--data", data, "Dataset root (defaults to config data.root)");
  tr->add_option("--out", out, "Output directory")->required();
  tr->add_option("--seed", seed, "Init and batch-order seed");
  tr->add_option("--resume", resume, "Checkpoint to continue from");
  tr->callback([&] { action = [&] { return cmd_train(config, data, out, seed, resume); }; });

  CLI::App* inf = app.add_subcommand("infer", "Run a checkpoint over images");
  inf->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  inf->add_option("images", images, "PGM/PPM image paths");
  inf->add_option("--data", data, "Dataset root instead of image paths");
  inf->add_option("--split", split, "Dataset split (default test)");
  inf->add_option("--limit", limit, "Process at most N dataset images");
  inf->add_option("--out", out, "Output directory")->required();
  inf->add_flag("--no-prune", no_prune, "Disable token pruning");
  inf->callback([&] {
    action = [&] { return cmd_infer(checkpoint, images, data, split, limit, out, no_prune); };
  });

  CLI::App* ev = app.add_subcommand("eval", "Score predictions against a dataset split");
  ev->add_option("--pred", pred, "Directory of predicted edge maps")->required();
  ev->add_option("--data", data, "Dataset root")->required();
  ev->add_option("--split", split, "Dataset split (default test)");
  ev->add_option("--out", out, "Output directory")->required();
  ev->add_option("--tolerance", tolerance, "Match radius as fraction of diagonal");
  ev->add_option("--jobs", jobs, "Worker threads");
  ev->add_option("--limit", limit, "Score at most N split images");
  ev->callback(
      [&] { action = [&] { return cmd_eval(pred, data, split, out, tolerance, jobs, limit); }; });

  CLI::App* fl = app.add_subcommand("flops", "Analytic compute report");
  fl->add_option("--config", config, "Run config JSON (for --arch config)");
  fl->add_option("--arch", arch, "vit-b, vit-l or config (default)");
  fl->add_option("--keep", keep, "Per-stage keep fractions, e.g. 0.7,0.5");
  fl->add_option("--out", out, "Output directory")->required();
  fl->callback([&] { action = [&] { return cmd_flops(config, arch, keep, out); }; });

  CLI::App* sw = app.add_subcommand("prune-sweep", "Accuracy/compute trade-off table");
  sw->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  sw->add_option("--data", data, "Dataset root")->required();
  sw->add_option("--split", split, "Dataset split (default test)");
  sw->add_option("--schedules", schedules, "e.g. \"[0.3,0.4,0.5];[0.4,0.5,0.6]\"")->required();
  sw->add_option("--out", out, "Output directory")->required();
  sw->add_option("--tolerance", tolerance, "Match radius as fraction of diagonal");
  sw->add_option("--jobs", jobs, "Worker threads");
  sw->add_option("--limit", limit, "Use at most N split images");
  sw->callback([&] {
    action = [&] {
      return cmd_prune_sweep(checkpoint, data, split, schedules, out, tolerance, jobs, limit);
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }

  try {
    return action();
  } catch (const std::exception& e) {
    std::cout << json{{"error", {{"code", "runtime"}, {"message", e.what()}}}}.dump() << "\n";
    return 1;
  }
}
