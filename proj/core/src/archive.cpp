// core/src/archive.cpp

// Copyright 2026  MSpec authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mspec/archive.hpp"

#include <filesystem>
#include <fstream>

#include "mspec/binio.hpp"

namespace fs = std::filesystem;

namespace mspec::pipeline {

namespace {

using io::ByteReader;
using io::ByteWriter;

void put_tensor(ByteWriter &w, const nn::Tensor &t) {
  w.i32_vec(t.shape);
  w.f64_vec(t.data);
}

nn::Tensor get_tensor(ByteReader &r) {
  nn::Tensor t;
  t.shape = r.i32_vec();
  t.data = r.f64_vec();
  if (!t.shape.empty() &&
      nn::Tensor::numel_of(t.shape) != static_cast<int64_t>(t.data.size()))
    throw FormatError("tensor shape/data mismatch");
  return t;
}

void put_layer(ByteWriter &w, const nn::LayerParams &l) {
  w.u8(static_cast<uint8_t>(l.kind));
  w.i32(l.in_channels);
  w.i32(l.out_channels);
  w.i32(l.kernel_h);
  w.i32(l.kernel_w);
  w.i32(l.stride);
  w.i32(l.pad);
  w.i32(l.out_pad_h);
  w.i32(l.out_pad_w);
  w.i32(l.in_dim);
  w.i32(l.out_dim);
  w.i32_vec(l.target_shape);
  w.i32_vec(l.split_sizes);
  put_tensor(w, l.weight);
  put_tensor(w, l.bias);
}

nn::LayerParams get_layer(ByteReader &r) {
  nn::LayerParams l;
  l.kind = static_cast<nn::LayerKind>(r.u8());
  l.in_channels = r.i32();
  l.out_channels = r.i32();
  l.kernel_h = r.i32();
  l.kernel_w = r.i32();
  l.stride = r.i32();
  l.pad = r.i32();
  l.out_pad_h = r.i32();
  l.out_pad_w = r.i32();
  l.in_dim = r.i32();
  l.out_dim = r.i32();
  l.target_shape = r.i32_vec();
  l.split_sizes = r.i32_vec();
  l.weight = get_tensor(r);
  l.bias = get_tensor(r);
  return l;
}

void put_graph(ByteWriter &w, const nn::ModelGraph &g) {
  w.u32(static_cast<uint32_t>(g.nodes.size()));
  for (const auto &node : g.nodes) {
    w.str(node.name);
    put_layer(w, node.layer);
    w.u32(static_cast<uint32_t>(node.inputs.size()));
    for (const auto &s : node.inputs) w.str(s);
    w.u32(static_cast<uint32_t>(node.outputs.size()));
    for (const auto &s : node.outputs) w.str(s);
  }
  w.u32(static_cast<uint32_t>(g.input_names.size()));
  for (const auto &s : g.input_names) w.str(s);
  w.u32(static_cast<uint32_t>(g.output_names.size()));
  for (const auto &s : g.output_names) w.str(s);
  w.str(g.bottleneck_name);
}

nn::ModelGraph get_graph(ByteReader &r) {
  nn::ModelGraph g;
  const uint32_t n_nodes = r.u32();
  g.nodes.reserve(n_nodes);
  for (uint32_t i = 0; i < n_nodes; ++i) {
    nn::GraphNode node;
    node.name = r.str();
    node.layer = get_layer(r);
    const uint32_t n_in = r.u32();
    for (uint32_t k = 0; k < n_in; ++k) node.inputs.push_back(r.str());
    const uint32_t n_out = r.u32();
    for (uint32_t k = 0; k < n_out; ++k) node.outputs.push_back(r.str());
    g.nodes.push_back(std::move(node));
  }
  const uint32_t n_gin = r.u32();
  for (uint32_t k = 0; k < n_gin; ++k) g.input_names.push_back(r.str());
  const uint32_t n_gout = r.u32();
  for (uint32_t k = 0; k < n_gout; ++k) g.output_names.push_back(r.str());
  g.bottleneck_name = r.str();
  g.validate();
  return g;
}

void put_spec(ByteWriter &w, const repr::RepresentationSpec &s) {
  w.str(repr::kind_name(s.kind));
  w.f64(s.window_ms);
  w.f64(s.shift_ms);
  w.i32(s.n_bands);
}

repr::RepresentationSpec get_spec(ByteReader &r) {
  repr::RepresentationSpec s;
  s.kind = repr::kind_from_name(r.str());
  s.window_ms = r.f64();
  s.shift_ms = r.f64();
  s.n_bands = r.i32();
  return s;
}

void put_cae_config(ByteWriter &w, const cae::CAEConfig &c) {
  w.u32(static_cast<uint32_t>(c.branch_specs.size()));
  for (const auto &s : c.branch_specs) put_spec(w, s);
  w.i32_vec(c.channels_per_stage);
  w.i32(c.post_concat_channels);
  w.i32(c.bottleneck_dim);
  w.i32(c.kernel);
  w.i32(c.stride);
  w.i32(c.padding);
  w.i32(c.epochs);
  w.i32(c.batch_size);
  w.i32(c.patience);
  w.f64(c.learning_rate);
}

cae::CAEConfig get_cae_config(ByteReader &r) {
  cae::CAEConfig c;
  const uint32_t n = r.u32();
  for (uint32_t i = 0; i < n; ++i) c.branch_specs.push_back(get_spec(r));
  c.channels_per_stage = r.i32_vec();
  c.post_concat_channels = r.i32();
  c.bottleneck_dim = r.i32();
  c.kernel = r.i32();
  c.stride = r.i32();
  c.padding = r.i32();
  c.epochs = r.i32();
  c.batch_size = r.i32();
  c.patience = r.i32();
  c.learning_rate = r.f64();
  return c;
}

void put_scaler(ByteWriter &w, const clf::Standardizer &s) {
  w.f64_vec(s.mean);
  w.f64_vec(s.stddev);
}

clf::Standardizer get_scaler(ByteReader &r) {
  clf::Standardizer s;
  s.mean = r.f64_vec();
  s.stddev = r.f64_vec();
  return s;
}

void put_svm(ByteWriter &w, const clf::SvmModel &m) {
  w.u32(static_cast<uint32_t>(m.support_vectors.size()));
  for (const auto &sv : m.support_vectors) w.f64_vec(sv);
  w.f64_vec(m.dual_coefs);
  w.f64(m.bias);
  w.f64(m.gamma);
  w.f64(m.c);
  w.u8(m.platt_a.has_value() ? 1 : 0);
  if (m.platt_a.has_value()) {
    w.f64(*m.platt_a);
    w.f64(*m.platt_b);
  }
}

clf::SvmModel get_svm(ByteReader &r) {
  clf::SvmModel m;
  const uint32_t n = r.u32();
  m.support_vectors.reserve(n);
  for (uint32_t i = 0; i < n; ++i) m.support_vectors.push_back(r.f64_vec());
  m.dual_coefs = r.f64_vec();
  m.bias = r.f64();
  m.gamma = r.f64();
  m.c = r.f64();
  if (r.u8()) {
    m.platt_a = r.f64();
    m.platt_b = r.f64();
  }
  return m;
}

void put_mlp(ByteWriter &w, const clf::MlpModel &m) {
  for (const nn::LayerParams *l : {&m.fc1, &m.fc2, &m.fc3}) put_layer(w, *l);
  w.f64(m.dropout);
}

clf::MlpModel get_mlp(ByteReader &r) {
  clf::MlpModel m;
  m.fc1 = get_layer(r);
  m.fc2 = get_layer(r);
  m.fc3 = get_layer(r);
  m.dropout = r.f64();
  return m;
}

}  // namespace

void save_model(const ModelArchive &archive, const std::string &path) {
  ByteWriter w;
  w.bytes().insert(w.bytes().end(), ModelArchive::kMagic, ModelArchive::kMagic + 4);
  w.u32(archive.version);

  w.u64(archive.seed);
  w.str(archive.config_hash);
  w.str(archive.fusion_mode);
  w.str(archive.classifier_kind);
  w.str(archive.feature_set);

  w.u32(static_cast<uint32_t>(archive.cae_configs.size()));
  for (const auto &c : archive.cae_configs) put_cae_config(w, c);
  w.u32(static_cast<uint32_t>(archive.graphs.size()));
  for (const auto &g : archive.graphs) put_graph(w, g);
  w.u32(static_cast<uint32_t>(archive.scalers.size()));
  for (const auto &s : archive.scalers) put_scaler(w, s);
  w.u32(static_cast<uint32_t>(archive.svms.size()));
  for (const auto &m : archive.svms) put_svm(w, m);
  w.u32(static_cast<uint32_t>(archive.mlps.size()));
  for (const auto &m : archive.mlps) put_mlp(w, m);
  w.u8(archive.fusion_weights.has_value() ? 1 : 0);
  if (archive.fusion_weights.has_value()) {
    w.f64_vec(archive.fusion_weights->weights);
    w.f64(archive.fusion_weights->bias);
  }

  const uint32_t checksum = io::crc32(w.bytes().data(), w.bytes().size());
  w.u32(checksum);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("save_model: cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char *>(w.bytes().data()),
              static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("save_model: short write to '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

ModelArchive load_model(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_model: cannot read '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());

  if (bytes.size() < 12 ||
      !std::equal(ModelArchive::kMagic, ModelArchive::kMagic + 4, bytes.begin()))
    throw ArchiveError(ArchiveError::Kind::kBadMagic,
                       "'" + path + "' is not a model archive (bad magic)");

  const size_t body = bytes.size() - 4;
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<uint32_t>(bytes[body + i]) << (8 * i);
  if (io::crc32(bytes.data(), body) != stored)
    throw ArchiveError(ArchiveError::Kind::kChecksum,
                       "'" + path + "' failed its checksum (corrupt or truncated)");

  ByteReader r(bytes.data() + 4, body - 4);
  ModelArchive archive;
  try {
    archive.version = r.u32();
    if (archive.version > ModelArchive::kCurrentVersion)
      throw ArchiveError(ArchiveError::Kind::kVersion,
                         "'" + path + "' has format version " +
                             std::to_string(archive.version) + "; this build reads up to " +
                             std::to_string(ModelArchive::kCurrentVersion));

    archive.seed = r.u64();
    archive.config_hash = r.str();
    archive.fusion_mode = r.str();
    archive.classifier_kind = r.str();
    archive.feature_set = r.str();

    const uint32_t n_cfg = r.u32();
    for (uint32_t i = 0; i < n_cfg; ++i) archive.cae_configs.push_back(get_cae_config(r));
    const uint32_t n_graphs = r.u32();
    for (uint32_t i = 0; i < n_graphs; ++i) archive.graphs.push_back(get_graph(r));
    const uint32_t n_scalers = r.u32();
    for (uint32_t i = 0; i < n_scalers; ++i) archive.scalers.push_back(get_scaler(r));
    const uint32_t n_svms = r.u32();
    for (uint32_t i = 0; i < n_svms; ++i) archive.svms.push_back(get_svm(r));
    const uint32_t n_mlps = r.u32();
    for (uint32_t i = 0; i < n_mlps; ++i) archive.mlps.push_back(get_mlp(r));
    if (r.u8()) {
      clf::FusionWeights fw;
      fw.weights = r.f64_vec();
      fw.bias = r.f64();
      archive.fusion_weights = fw;
    }
  } catch (const ArchiveError &) {
    throw;
  } catch (const Error &e) {
    throw ArchiveError(ArchiveError::Kind::kParse,
                       "'" + path + "': malformed archive payload: " + e.what());
  }
  return archive;
}

void check_archive_branches(const ModelArchive &archive,
                            const std::vector<repr::RepresentationSpec> &expected) {
  std::vector<repr::RepresentationSpec> actual;
  for (const auto &cfg : archive.cae_configs)
    actual.insert(actual.end(), cfg.branch_specs.begin(), cfg.branch_specs.end());
  if (actual.size() != expected.size()) {
    throw ArchiveError(ArchiveError::Kind::kShapeMismatch,
                       "archive was trained with " + std::to_string(actual.size()) +
                           " representation branch(es) but the experiment expects " +
                           std::to_string(expected.size()));
  }
  for (size_t i = 0; i < expected.size(); ++i) {
    if (actual[i].kind != expected[i].kind || actual[i].n_bands != expected[i].n_bands)
      throw ArchiveError(ArchiveError::Kind::kShapeMismatch,
                         "archive branch " + std::to_string(i) + " is " +
                             repr::kind_name(actual[i].kind) + "/" +
                             std::to_string(actual[i].n_bands) +
                             " bands but the experiment expects " +
                             repr::kind_name(expected[i].kind) + "/" +
                             std::to_string(expected[i].n_bands));
  }
}

}  // namespace mspec::pipeline
