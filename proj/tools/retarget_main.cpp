// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Links only the public C API.

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <retarget/retarget.h>

namespace {

struct ConfigDeleter {
  void operator()(rt_config* c) const { rt_config_free(c); }
};
struct ManifestDeleter {
  void operator()(rt_manifest* m) const { rt_manifest_free(m); }
};
struct StatsDeleter {
  void operator()(rt_stats* s) const { rt_stats_free(s); }
};
struct PoseSeqDeleter {
  void operator()(rt_pose_seq* s) const { rt_pose_seq_free(s); }
};
struct ModelDeleter {
  void operator()(rt_model* m) const { rt_model_free(m); }
};

using ConfigPtr = std::unique_ptr<rt_config, ConfigDeleter>;
using ManifestPtr = std::unique_ptr<rt_manifest, ManifestDeleter>;
using StatsPtr = std::unique_ptr<rt_stats, StatsDeleter>;
using PoseSeqPtr = std::unique_ptr<rt_pose_seq, PoseSeqDeleter>;
using ModelPtr = std::unique_ptr<rt_model, ModelDeleter>;

// Exit codes: 0 success, 1 validation error, 2 runtime failure.
int exit_code_for(rt_status status) {
  return status == RT_ERROR_VALIDATION ? 1 : 2;
}

[[noreturn]] void die(rt_status status) {
  std::fprintf(stderr, "error: %s\n", rt_last_error_message());
  std::exit(exit_code_for(status));
}

void check(rt_status status) {
  if (status != RT_OK) die(status);
}

struct GlobalFlags {
  std::string config_path;
  std::vector<std::string> sets;  // key=value overrides
  long long seed = -1;
  bool toy = false;
  std::string mode;
};

ConfigPtr build_config(const GlobalFlags& g) {
  rt_config* cfg = nullptr;
  if (!g.config_path.empty())
    check(rt_config_load(g.config_path.c_str(), &cfg));
  else
    check(rt_config_create(&cfg));
  ConfigPtr out(cfg);
  if (g.toy) check(rt_config_set(cfg, "toy", "true"));
  if (g.seed >= 0) check(rt_config_set(cfg, "seed", std::to_string(g.seed).c_str()));
  if (!g.mode.empty()) check(rt_config_set(cfg, "mode", g.mode.c_str()));
  for (const auto& kv : g.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: --set expects key=value, got \"%s\"\n", kv.c_str());
      std::exit(1);
    }
    check(rt_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  return out;
}

ManifestPtr load_manifest_arg(const std::string& path) {
  rt_manifest* m = nullptr;
  check(rt_manifest_load(path.c_str(), &m));
  return ManifestPtr(m);
}

StatsPtr load_stats_arg(const std::string& path) {
  rt_stats* s = nullptr;
  check(rt_stats_load(path.c_str(), &s));
  return StatsPtr(s);
}

std::string default_checkpoint_dir() {
  if (const char* root = std::getenv("RETARGET_CACHE_ROOT"))
    return std::string(root) + "/checkpoints";
  return "checkpoints";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pose-driven video motion transfer pipeline"};
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config_path, "run config file (key = value lines)");
  app.add_option("--set", g.sets, "override a config key (key=value, repeatable)");
  app.add_option("--seed", g.seed, "random seed");
  app.add_flag("--toy", g.toy, "use the CPU-scale toy preset");
  app.add_option("--mode", g.mode, "ablation mode: fbf, fbf-ts or fbf-ts-fg");

  std::function<void()> run;

  // ---- ingest ----
  auto* ingest = app.add_subcommand("ingest", "pair frame and pose files into a manifest");
  {
    static std::string frames, poses, subject = "subject", out;
    static double fps = 30.0;
    static int downsample = 1;
    ingest->add_option("--frames", frames, "frames directory")->required();
    ingest->add_option("--poses", poses, "detector JSON directory")->required();
    ingest->add_option("--fps", fps, "source frame rate");
    ingest->add_option("--downsample", downsample, "keep every k-th frame");
    ingest->add_option("--subject", subject, "subject id");
    ingest->add_option("--out", out, "output manifest path")->required();
    ingest->callback([&] {
      run = [&] {
        rt_manifest* m = nullptr;
        check(rt_ingest(frames.c_str(), poses.c_str(), fps, downsample, subject.c_str(), &m));
        ManifestPtr manifest(m);
        check(rt_manifest_save(m, out.c_str()));
        std::printf("ingested %lld entries (%lld usable) -> %s\n",
                    static_cast<long long>(rt_manifest_entry_count(m)),
                    static_cast<long long>(rt_manifest_usable_count(m)), out.c_str());
      };
    });
  }

  // ---- split ----
  auto* split = app.add_subcommand("split", "assign the contiguous train/test split");
  {
    static std::string in, out;
    static double fraction = 0.2;
    split->add_option("--manifest", in, "input manifest")->required();
    split->add_option("--fraction", fraction, "training fraction (default 0.2)");
    split->add_option("--out", out, "output manifest path")->required();
    split->callback([&] {
      run = [&] {
        ManifestPtr m = load_manifest_arg(in);
        rt_manifest* s = nullptr;
        check(rt_manifest_split(m.get(), fraction, &s));
        ManifestPtr split_manifest(s);
        check(rt_manifest_save(s, out.c_str()));
        std::printf("split written -> %s\n", out.c_str());
      };
    });
  }

  // ---- stats ----
  auto* stats = app.add_subcommand("stats", "compute subject normalization statistics");
  {
    static std::string in, out, split_name = "train";
    static double alpha = 0.7;
    static bool literal = false;
    stats->add_option("--manifest", in, "input manifest")->required();
    stats->add_option("--split", split_name, "split to use: train, test or all");
    stats->add_option("--alpha", alpha, "far-position cluster threshold");
    stats->add_flag("--literal-far-rule", literal, "use the literal far-position formula");
    stats->add_option("--out", out, "output stats file");
    stats->callback([&] {
      run = [&] {
        ManifestPtr m = load_manifest_arg(in);
        rt_stats* s = nullptr;
        check(rt_compute_stats(m.get(), split_name.c_str(), alpha, literal ? 1 : 0, &s));
        StatsPtr stats_handle(s);
        for (const char* field :
             {"close_y", "far_y", "height_close", "height_far", "median_y", "alpha"}) {
          double v = 0;
          check(rt_stats_get(s, field, &v));
          std::printf("%s = %.6f\n", field, v);
        }
        if (!out.empty()) check(rt_stats_save(s, out.c_str()));
      };
    });
  }

  // ---- render-poses ----
  auto* render = app.add_subcommand("render-poses", "rasterize stick figures for a manifest");
  {
    static std::string in, out;
    static int width = 512, height = 256;
    render->add_option("--manifest", in, "input manifest")->required();
    render->add_option("--out", out, "output directory")->required();
    render->add_option("--width", width, "canvas width");
    render->add_option("--height", height, "canvas height");
    render->callback([&] {
      run = [&] {
        ManifestPtr m = load_manifest_arg(in);
        check(rt_render_poses(m.get(), out.c_str(), width, height));
        std::printf("stick figures -> %s\n", out.c_str());
      };
    });
  }

  // ---- train ----
  auto* train = app.add_subcommand("train", "train one stage or a full schedule");
  {
    static std::string manifest_path, model_in, model_out, ckpt_dir, metrics, schedule;
    static std::string stage;
    static long long epochs = -1;
    train->add_option("--manifest", manifest_path, "training manifest")->required();
    train->add_option("--model-in", model_in, "checkpoint to continue from");
    train->add_option("--model-out", model_out, "where to store the final bundle");
    train->add_option("--checkpoint-dir", ckpt_dir,
                      "per-epoch checkpoint directory (default $RETARGET_CACHE_ROOT/checkpoints)");
    train->add_option("--metrics", metrics, "metrics TSV to append to");
    train->add_option("--stage", stage, "stage to train: global, local or face");
    train->add_option("--epochs", epochs, "epoch count for --stage");
    train->add_option("--schedule", schedule, "run the full stage schedule: paper or toy");
    train->callback([&] {
      run = [&] {
        ConfigPtr cfg = build_config(g);
        rt_model* model = nullptr;
        if (!model_in.empty())
          check(rt_model_load(model_in.c_str(), &model));
        else
          check(rt_model_create(cfg.get(), &model));
        ModelPtr model_ptr(model);
        ManifestPtr m = load_manifest_arg(manifest_path);
        const std::string dir = ckpt_dir.empty() ? default_checkpoint_dir() : ckpt_dir;
        if (!schedule.empty()) {
          check(rt_train_schedule(model, m.get(), cfg.get(), schedule.c_str(), dir.c_str(),
                                  metrics.empty() ? nullptr : metrics.c_str()));
        } else {
          if (!stage.empty()) check(rt_config_set(cfg.get(), "train.stage", stage.c_str()));
          if (epochs > 0)
            check(rt_config_set(cfg.get(), "train.epochs", std::to_string(epochs).c_str()));
          check(rt_train(model, m.get(), cfg.get(), dir.c_str(),
                         metrics.empty() ? nullptr : metrics.c_str()));
        }
        if (!model_out.empty()) check(rt_model_save(model, model_out.c_str()));
        std::printf("training done; checkpoints in %s\n", dir.c_str());
      };
    });
  }

  // ---- transfer ----
  auto* transfer = app.add_subcommand("transfer", "synthesize the target performing the source motion");
  {
    static std::string model_path, poses_dir, src_stats, tgt_stats, out;
    static std::string mode = "fbf-ts-fg";
    static double fps = 30.0;
    static int tw = 0, th = 0;
    transfer->add_option("--model", model_path, "trained bundle checkpoint")->required();
    transfer->add_option("--source-poses", poses_dir, "source pose JSON directory")->required();
    transfer->add_option("--src-stats", src_stats, "source subject stats file")->required();
    transfer->add_option("--tgt-stats", tgt_stats, "target subject stats file")->required();
    transfer->add_option("--mode", mode, "fbf, fbf-ts or fbf-ts-fg");
    transfer->add_option("--fps", fps, "source frame rate (metadata only)");
    transfer->add_option("--target-width", tw, "target video width (stats coordinate frame)");
    transfer->add_option("--target-height", th, "target video height");
    transfer->add_option("--out", out, "output frames directory")->required();
    transfer->callback([&] {
      run = [&] {
        rt_model* model = nullptr;
        check(rt_model_load(model_path.c_str(), &model));
        ModelPtr model_ptr(model);
        rt_pose_seq* seq = nullptr;
        check(rt_pose_seq_load_dir(poses_dir.c_str(), fps, &seq));
        PoseSeqPtr seq_ptr(seq);
        StatsPtr src = load_stats_arg(src_stats), tgt = load_stats_arg(tgt_stats);
        ConfigPtr provenance;
        {
          rt_config* p = nullptr;
          check(rt_config_create(&p));
          provenance.reset(p);
          check(rt_config_set(p, "source_poses", poses_dir.c_str()));
          check(rt_config_set(p, "source_stats", src_stats.c_str()));
          check(rt_config_set(p, "target_stats", tgt_stats.c_str()));
          check(rt_config_set(p, "checkpoint", model_path.c_str()));
        }
        check(rt_transfer(model, seq, src.get(), tgt.get(), mode.c_str(), tw, th, out.c_str(),
                          provenance.get()));
        std::printf("%lld frames -> %s\n", static_cast<long long>(rt_pose_seq_size(seq)),
                    out.c_str());
      };
    });
  }

  // ---- nn-baseline ----
  auto* nn = app.add_subcommand("nn-baseline", "nearest-neighbor retrieval baseline");
  {
    static std::string poses_dir, target_manifest, src_stats, tgt_stats, out, indices;
    static double fps = 30.0;
    nn->add_option("--source-poses", poses_dir, "source pose JSON directory")->required();
    nn->add_option("--target-manifest", target_manifest, "target training manifest")->required();
    nn->add_option("--src-stats", src_stats, "source stats (optional, with --tgt-stats)");
    nn->add_option("--tgt-stats", tgt_stats, "target stats (optional)");
    nn->add_option("--fps", fps, "source frame rate");
    nn->add_option("--out", out, "output frames directory")->required();
    nn->add_option("--indices", indices, "write matched target indices here");
    nn->callback([&] {
      run = [&] {
        rt_pose_seq* seq = nullptr;
        check(rt_pose_seq_load_dir(poses_dir.c_str(), fps, &seq));
        PoseSeqPtr seq_ptr(seq);
        ManifestPtr target = load_manifest_arg(target_manifest);
        StatsPtr src, tgt;
        if (!src_stats.empty()) src = load_stats_arg(src_stats);
        if (!tgt_stats.empty()) tgt = load_stats_arg(tgt_stats);
        check(rt_nn_baseline(seq, target.get(), src.get(), tgt.get(), out.c_str(),
                             indices.empty() ? nullptr : indices.c_str()));
        std::printf("matched frames -> %s\n", out.c_str());
      };
    });
  }

  // ---- evaluate ----
  auto* evaluate = app.add_subcommand("evaluate", "score generated frames against ground truth");
  {
    static std::string pred, manifest_path, report, split_name = "test";
    static int face_size = 128;
    evaluate->add_option("--pred", pred, "generated frames directory")->required();
    evaluate->add_option("--manifest", manifest_path, "ground-truth manifest")->required();
    evaluate->add_option("--split", split_name, "split to score against");
    evaluate->add_option("--face-size", face_size, "face crop side in pixels");
    evaluate->add_option("--report", report, "output report path")->required();
    evaluate->callback([&] {
      run = [&] {
        ManifestPtr m = load_manifest_arg(manifest_path);
        check(rt_evaluate(pred.c_str(), m.get(), split_name.c_str(), face_size, report.c_str()));
        std::printf("report -> %s\n", report.c_str());
      };
    });
  }

  // ---- fakedet-build ----
  auto* fbuild = app.add_subcommand("fakedet-build", "build the labeled frame-pair dataset");
  {
    static std::vector<std::string> real, fake, test_subjects;
    static std::string out;
    static int stride = 1;
    fbuild->add_option("--real", real, "real footage manifest (repeatable)")->required();
    fbuild->add_option("--fake", fake, "synthesized footage manifest (repeatable)")->required();
    fbuild->add_option("--test-subject", test_subjects, "held-out subject id (repeatable)");
    fbuild->add_option("--stride", stride, "frame-pair stride");
    fbuild->add_option("--out", out, "output dataset path")->required();
    fbuild->callback([&] {
      run = [&] {
        std::vector<const char*> real_ptrs, fake_ptrs, test_ptrs;
        for (const auto& s : real) real_ptrs.push_back(s.c_str());
        for (const auto& s : fake) fake_ptrs.push_back(s.c_str());
        for (const auto& s : test_subjects) test_ptrs.push_back(s.c_str());
        check(rt_fakedet_build(real_ptrs.data(), static_cast<int>(real_ptrs.size()),
                               fake_ptrs.data(), static_cast<int>(fake_ptrs.size()), stride,
                               test_ptrs.data(), static_cast<int>(test_ptrs.size()),
                               out.c_str()));
        std::printf("pair dataset -> %s\n", out.c_str());
      };
    });
  }

  // ---- fakedet-train ----
  auto* ftrain = app.add_subcommand("fakedet-train", "train the synthetic-video detector");
  {
    static std::string dataset, out;
    ftrain->add_option("--dataset", dataset, "pair dataset path")->required();
    ftrain->add_option("--out", out, "detector checkpoint path")->required();
    ftrain->callback([&] {
      run = [&] {
        ConfigPtr cfg = build_config(g);
        double accuracy = 0.0;
        check(rt_fakedet_train(dataset.c_str(), cfg.get(), out.c_str(), &accuracy));
        std::printf("held-out pair accuracy: %.4f\ndetector -> %s\n", accuracy, out.c_str());
      };
    });
  }

  // ---- fakedet-classify ----
  auto* fclassify = app.add_subcommand("fakedet-classify", "classify a video as real or synthesized");
  {
    static std::string detector, frames, report;
    fclassify->add_option("--detector", detector, "detector checkpoint")->required();
    fclassify->add_option("--frames", frames, "frames directory")->required();
    fclassify->add_option("--report", report, "classification report path");
    fclassify->callback([&] {
      run = [&] {
        double prob = 0.0;
        int label = 0;
        check(rt_fakedet_classify(detector.c_str(), frames.c_str(),
                                  report.empty() ? nullptr : report.c_str(), &prob, &label));
        std::printf("video probability (real): %.6g\nlabel: %s\n", prob,
                    label ? "real" : "fake");
      };
    });
  }

  CLI11_PARSE(app, argc, argv);
  if (run) run();
  return 0;
}
