// Copyright (C) 2026 the retarget authors
// SPDX-License-Identifier: Apache-2.0

#include "core/checkpoint.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace retarget {

namespace {

constexpr char kMagic[8] = {'R', 'T', 'C', 'K', 'P', 'T', '0', '1'};

void write_u64(std::ofstream& out, uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(buf), 8);
}

uint64_t read_u64(std::ifstream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf[i]) << (8 * i);
  return v;
}

}  // namespace

void save_tensor_file(
    const std::string& path, const nlohmann::json& meta,
    const std::vector<std::pair<std::string, const nn::Tensor<float>*>>& tensors) {
  nlohmann::json header;
  header["format"] = "retarget-checkpoint";
  header["format_version"] = 1;
  header["meta"] = meta;
  nlohmann::json dir = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& [name, tensor] : tensors) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["dtype"] = "f32";
    entry["shape"] = tensor->shape();
    entry["offset"] = offset;
    entry["numel"] = tensor->numel();
    dir.push_back(entry);
    offset += static_cast<uint64_t>(tensor->numel()) * sizeof(float);
  }
  header["tensors"] = dir;
  const std::string header_text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) fail(ErrorCode::io_error, "cannot write " + tmp);
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, header_text.size());
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& [name, tensor] : tensors)
      out.write(reinterpret_cast<const char*>(tensor->data()),
                static_cast<std::streamsize>(tensor->numel() * sizeof(float)));
    if (!out) fail(ErrorCode::io_error, "failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    fail(ErrorCode::io_error, "cannot rename " + tmp + " to " + path);
}

TensorFile load_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_error, "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    fail(ErrorCode::malformed_input, "not a checkpoint file: " + path);
  const uint64_t header_len = read_u64(in);
  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) fail(ErrorCode::malformed_input, "truncated checkpoint header: " + path);
  nlohmann::json header = nlohmann::json::parse(header_text, nullptr, false);
  if (header.is_discarded()) fail(ErrorCode::malformed_input, "bad checkpoint header: " + path);
  const int version = header.value("format_version", 0);
  if (version != 1)
    fail(ErrorCode::malformed_input,
         "unsupported checkpoint format version " + std::to_string(version));

  TensorFile file;
  file.meta = header.value("meta", nlohmann::json::object());
  const std::streampos data_start = in.tellg();
  for (const auto& entry : header.value("tensors", nlohmann::json::array())) {
    const std::string name = entry.at("name").get<std::string>();
    const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    const uint64_t offset = entry.at("offset").get<uint64_t>();
    nn::Tensor<float> t(shape);
    in.seekg(data_start + static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.numel() * sizeof(float)));
    if (!in) fail(ErrorCode::malformed_input, "truncated checkpoint tensor " + name);
    file.tensors.emplace(name, std::move(t));
  }
  return file;
}

void load_store(nn::ParamStore<float>& store, const TensorFile& file) {
  for (const auto& [name, param] : store.entries()) {
    auto it = file.tensors.find(name);
    if (it == file.tensors.end())
      fail(ErrorCode::malformed_input, "checkpoint is missing tensor " + name);
    if (it->second.shape() != param->value.shape())
      fail(ErrorCode::shape_mismatch, "checkpoint tensor " + name + " has shape " +
                                          it->second.shape_string() + ", expected " +
                                          param->value.shape_string());
    std::copy(it->second.data(), it->second.data() + it->second.numel(), param->value.data());
  }
}

void save_model_bundle(const ModelBundle& bundle, const std::string& path) {
  nlohmann::json meta;
  meta["kind"] = "model";
  meta["mode"] = mode_name(bundle.mode);
  meta["seed"] = bundle.seed;
  meta["epoch"] = bundle.epoch;
  meta["global_done"] = bundle.global_done;
  meta["local_done"] = bundle.local_done;
  meta["face_done"] = bundle.face_done;
  KeyValueFile arch_kv;
  bundle.arch.to_kv(arch_kv, "");
  nlohmann::json arch;
  for (const auto& key : arch_kv.keys()) arch[key] = *arch_kv.get(key);
  meta["arch"] = arch;

  std::vector<std::pair<std::string, const nn::Tensor<float>*>> tensors;
  for (const auto* store :
       {&bundle.g_store, &bundle.d_store, &bundle.fg_store, &bundle.fd_store, &bundle.det_store})
    for (const auto& [name, param] : store->entries()) tensors.emplace_back(name, &param->value);
  save_tensor_file(path, meta, tensors);
}

std::unique_ptr<ModelBundle> load_model_bundle(const std::string& path) {
  TensorFile file = load_tensor_file(path);
  if (file.meta.value("kind", "") != "model")
    fail(ErrorCode::malformed_input, "not a model checkpoint: " + path);
  KeyValueFile arch_kv;
  for (const auto& [key, value] : file.meta.at("arch").items())
    arch_kv.set(key, value.get<std::string>());
  ArchConfig arch = ArchConfig::from_kv(arch_kv, "");

  // Recreate at the global tier, then promote, so the same code path builds
  // the parameter set in both cases.
  const bool is_local = arch.stage == Stage::local_stage;
  ArchConfig build_arch = arch;
  if (is_local) {
    build_arch.stage = Stage::global_stage;
    build_arch.image_width /= 2;
    build_arch.image_height /= 2;
    build_arch.n_discriminator_scales -= 1;
  }
  auto bundle = ModelBundle::create(build_arch, mode_from(file.meta.value("mode", "fbf-ts-fg")),
                                    file.meta.value("seed", 0ULL));
  if (is_local) bundle->promote_to_local();
  bundle->epoch = file.meta.value("epoch", 0);
  bundle->global_done = file.meta.value("global_done", false);
  bundle->local_done = file.meta.value("local_done", false);
  bundle->face_done = file.meta.value("face_done", false);

  for (auto* store : {&bundle->g_store, &bundle->d_store, &bundle->fg_store, &bundle->fd_store,
                      &bundle->det_store})
    load_store(*store, file);
  return bundle;
}

std::unique_ptr<DetectorModel> DetectorModel::create(int base_width, int n_layers, int width,
                                                     int height, uint64_t seed) {
  auto model = std::make_unique<DetectorModel>();
  model->base_width = base_width;
  model->n_layers = n_layers;
  model->width = width;
  model->height = height;
  model->seed = seed;
  model->store = nn::ParamStore<float>(seed ^ 0x64657463ULL);
  model->net = std::make_unique<nets::FakeDetectorNet>(model->store, "det", 6, base_width,
                                                       n_layers);
  return model;
}

double DetectorModel::pair_probability_real(const Image& a, const Image& b) const {
  auto na = nn::make_leaf(image_to_tensor(a));
  auto nb = nn::make_leaf(image_to_tensor(b));
  auto logit = net->forward_logit(nn::concat_channels<float>({na, nb}));
  return 1.0 / (1.0 + std::exp(-static_cast<double>(logit->value[0])));
}

void save_detector(const DetectorModel& model, const std::string& path) {
  nlohmann::json meta;
  meta["kind"] = "detector";
  meta["base_width"] = model.base_width;
  meta["n_layers"] = model.n_layers;
  meta["width"] = model.width;
  meta["height"] = model.height;
  meta["seed"] = model.seed;
  std::vector<std::pair<std::string, const nn::Tensor<float>*>> tensors;
  for (const auto& [name, param] : model.store.entries())
    tensors.emplace_back(name, &param->value);
  save_tensor_file(path, meta, tensors);
}

std::unique_ptr<DetectorModel> load_detector(const std::string& path) {
  TensorFile file = load_tensor_file(path);
  if (file.meta.value("kind", "") != "detector")
    fail(ErrorCode::malformed_input, "not a detector checkpoint: " + path);
  auto model = DetectorModel::create(file.meta.value("base_width", 16),
                                     file.meta.value("n_layers", 3), file.meta.value("width", 128),
                                     file.meta.value("height", 64), file.meta.value("seed", 0ULL));
  load_store(model->store, file);
  return model;
}

}  // namespace retarget
