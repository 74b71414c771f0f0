// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/fakedet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace retarget {

namespace {

Image load_at(const std::string& path, int width, int height) {
  Image img = load_image(path);
  while (img.width > width && img.height > height && img.width % 2 == 0 && img.height % 2 == 0)
    img = downsample_half(img);
  if (img.width != width || img.height != height)
    fail(ErrorCode::size_mismatch,
         "frame " + path + " cannot be brought to " + std::to_string(width) + "x" +
             std::to_string(height));
  return img;
}

// Keep `keep` of `total` elements, evenly strided.
std::vector<size_t> even_selection(size_t total, size_t keep) {
  std::vector<size_t> out;
  out.reserve(keep);
  for (size_t i = 0; i < keep; ++i) out.push_back(i * total / keep);
  return out;
}

void append_pairs(std::vector<FakePairSample>& out, const DatasetManifest& manifest, bool real,
                  int stride, const std::set<std::string>& test_subjects) {
  const Split split = test_subjects.count(manifest.subject_id) ? Split::test : Split::train;
  // Pair by frame-index adjacency; pose availability is irrelevant here,
  // only the pixels matter.
  std::map<int64_t, const ManifestEntry*> by_index;
  for (const auto& e : manifest.entries) by_index[e.frame_index] = &e;
  for (const auto& [index, entry] : by_index) {
    auto next = by_index.find(index + stride);
    if (next == by_index.end()) continue;
    FakePairSample s;
    s.frame_a = entry->frame_path;
    s.frame_b = next->second->frame_path;
    s.real = real;
    s.subject = manifest.subject_id;
    s.split = split;
    out.push_back(std::move(s));
  }
}

}  // namespace

size_t FakePairDataset::count(Split split, bool real) const {
  size_t n = 0;
  for (const auto& p : pairs)
    if (p.split == split && p.real == real) ++n;
  return n;
}

void FakePairDataset::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "retarget-fakepairs 1\n";
  for (const auto& p : pairs)
    out << (p.real ? "real" : "fake") << "\t" << p.subject << "\t"
        << (p.split == Split::test ? "test" : "train") << "\t" << p.frame_a << "\t" << p.frame_b
        << "\n";
  if (!out) fail(ErrorCode::io_error, "failed writing " + path);
}

FakePairDataset FakePairDataset::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("retarget-fakepairs 1", 0) != 0)
    fail(ErrorCode::malformed_input, "not a fake-pair dataset: " + path);
  FakePairDataset ds;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string label, subject, split, a, b;
    if (!std::getline(row, label, '\t') || !std::getline(row, subject, '\t') ||
        !std::getline(row, split, '\t') || !std::getline(row, a, '\t') ||
        !std::getline(row, b, '\t'))
      fail(ErrorCode::malformed_input, "bad dataset row: " + line);
    FakePairSample s;
    s.real = label == "real";
    s.subject = subject;
    s.split = split == "test" ? Split::test : Split::train;
    s.frame_a = a;
    s.frame_b = b;
    ds.pairs.push_back(std::move(s));
  }
  return ds;
}

FakePairDataset build_fake_dataset(const std::vector<DatasetManifest>& real_manifests,
                                   const std::vector<DatasetManifest>& fake_manifests,
                                   int stride, const std::vector<std::string>& test_subjects,
                                   double max_ratio) {
  if (stride < 1) fail(ErrorCode::invalid_config, "stride must be >= 1");
  if (max_ratio < 1.0) fail(ErrorCode::invalid_config, "max_ratio must be >= 1");
  const std::set<std::string> test_set(test_subjects.begin(), test_subjects.end());

  std::vector<FakePairSample> all;
  for (const auto& m : real_manifests) append_pairs(all, m, true, stride, test_set);
  for (const auto& m : fake_manifests) append_pairs(all, m, false, stride, test_set);
  if (all.empty()) fail(ErrorCode::empty_dataset, "no frame pairs to label");

  FakePairDataset ds;
  for (Split split : {Split::train, Split::test}) {
    std::vector<FakePairSample> real_side, fake_side;
    for (const auto& p : all)
      if (p.split == split) (p.real ? real_side : fake_side).push_back(p);
    if (real_side.empty() && fake_side.empty()) continue;
    if (real_side.empty() || fake_side.empty())
      fail(ErrorCode::label_imbalance,
           std::string(split == Split::test ? "test" : "train") +
               " split has only one label; cannot balance");
    // Downsample the larger class to at most max_ratio times the smaller.
    auto balance = [&](std::vector<FakePairSample>& larger, size_t smaller_count) {
      const size_t cap =
          static_cast<size_t>(std::floor(static_cast<double>(smaller_count) * max_ratio));
      if (larger.size() <= cap) return;
      std::vector<FakePairSample> kept;
      for (size_t i : even_selection(larger.size(), cap)) kept.push_back(larger[i]);
      larger = std::move(kept);
    };
    if (real_side.size() > fake_side.size())
      balance(real_side, fake_side.size());
    else
      balance(fake_side, real_side.size());
    ds.pairs.insert(ds.pairs.end(), real_side.begin(), real_side.end());
    ds.pairs.insert(ds.pairs.end(), fake_side.begin(), fake_side.end());
  }
  return ds;
}

std::unique_ptr<DetectorModel> train_fake_detector(const FakePairDataset& dataset,
                                                   const DetectorTrainConfig& config,
                                                   DetectorMetrics* metrics) {
  std::vector<const FakePairSample*> train_pairs, test_pairs;
  for (const auto& p : dataset.pairs)
    (p.split == Split::test ? test_pairs : train_pairs).push_back(&p);
  if (train_pairs.empty()) fail(ErrorCode::empty_dataset, "no training pairs");
  {
    bool has_real = false, has_fake = false;
    for (const auto* p : train_pairs) (p->real ? has_real : has_fake) = true;
    if (!has_real || !has_fake)
      fail(ErrorCode::label_imbalance, "training pairs carry a single label");
  }

  auto model = DetectorModel::create(config.base_width, config.n_layers, config.width,
                                     config.height, config.seed);
  nn::Adam<float> adam(model->store, config.lr, config.beta1, config.beta2);

  // Pair images are loaded once; toy-scale datasets fit in memory.
  std::vector<Image> a_imgs, b_imgs;
  a_imgs.reserve(train_pairs.size());
  for (const auto* p : train_pairs) {
    a_imgs.push_back(load_at(p->frame_a, config.width, config.height));
    b_imgs.push_back(load_at(p->frame_b, config.width, config.height));
  }

  std::vector<size_t> order(train_pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::mt19937_64 rng(config.seed * 0x9e3779b97f4a7c15ULL + static_cast<uint64_t>(epoch));
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<size_t>(rng() % i)]);

    double epoch_loss = 0.0;
    int steps = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<const Image*> a_ptrs, b_ptrs;
      nn::Tensor<float> labels({static_cast<int>(end - start), 1});
      for (size_t i = start; i < end; ++i) {
        a_ptrs.push_back(&a_imgs[order[i]]);
        b_ptrs.push_back(&b_imgs[order[i]]);
        labels[static_cast<int64_t>(i - start)] = train_pairs[order[i]]->real ? 1.0f : 0.0f;
      }
      auto a = nn::make_leaf(images_to_batch(a_ptrs));
      auto b = nn::make_leaf(images_to_batch(b_ptrs));
      auto logits = model->net->forward_logit(nn::concat_channels<float>({a, b}));
      // BCE with logits: mean(softplus(l) - y*l).
      auto y = nn::make_leaf(labels);
      auto loss = nn::mean_all(nn::sub(nn::softplus(logits), nn::mul(logits, y)));

      model->store.zero_grads();
      nn::backward(loss);
      adam.step();

      const double v = nn::scalar_value(loss);
      if (!std::isfinite(v))
        fail(ErrorCode::non_finite_loss,
             "non-finite detector loss at epoch " + std::to_string(epoch));
      epoch_loss += v;
      ++steps;
    }
    if (metrics) metrics->epoch_losses.push_back(epoch_loss / std::max(1, steps));
  }

  if (metrics) {
    int correct = 0;
    for (const auto* p : test_pairs) {
      const double prob = model->pair_probability_real(
          load_at(p->frame_a, config.width, config.height),
          load_at(p->frame_b, config.width, config.height));
      if ((prob > 0.5) == p->real) ++correct;
    }
    metrics->n_heldout_pairs = static_cast<int>(test_pairs.size());
    metrics->heldout_accuracy =
        test_pairs.empty() ? 0.0 : static_cast<double>(correct) / test_pairs.size();
  }
  return model;
}

VideoClassification combine_pair_probabilities(const std::vector<double>& pair_probs) {
  if (pair_probs.empty())
    fail(ErrorCode::too_few_frames, "no frame pairs to combine");
  VideoClassification out;
  double log_real = 0.0, log_fake = 0.0;
  for (double p : pair_probs) {
    p = std::clamp(p, 1e-6, 1.0 - 1e-6);
    out.pair_probabilities.push_back(p);
    log_real += std::log(p);
    log_fake += std::log(1.0 - p);
  }
  out.video_probability_real = std::exp(log_real);
  out.mean_log_odds = (log_real - log_fake) / static_cast<double>(out.pair_probabilities.size());
  out.label_real = log_real > log_fake;
  return out;
}

VideoClassification classify_video(const std::vector<Image>& frames,
                                   const DetectorModel& detector) {
  if (frames.size() < 2)
    fail(ErrorCode::too_few_frames, "classify_video needs at least 2 frames");
  std::vector<double> probs;
  for (size_t i = 0; i + 1 < frames.size(); ++i)
    probs.push_back(detector.pair_probability_real(frames[i], frames[i + 1]));
  return combine_pair_probabilities(probs);
}

void save_classification_report(const VideoClassification& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io_error, "cannot write " + path);
  out << "retarget-classification 1\n";
  out << "label\t" << (result.label_real ? "real" : "fake") << "\n";
  out << "video_probability_real\t" << result.video_probability_real << "\n";
  out << "mean_log_odds\t" << result.mean_log_odds << "\n";
  out << "pairs\t" << result.pair_probabilities.size() << "\n";
  for (size_t i = 0; i < result.pair_probabilities.size(); ++i)
    out << "pair\t" << i << "\t" << result.pair_probabilities[i] << "\n";
  if (!out) fail(ErrorCode::io_error, "failed writing " + path);
}

}  // namespace retarget
