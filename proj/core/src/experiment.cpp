// core/src/experiment.cpp

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

#include "mspec/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mspec/audio.hpp"
#include "mspec/binio.hpp"
#include "mspec/rng.hpp"

namespace fs = std::filesystem;

namespace mspec::pipeline {

namespace {

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string &s) {
  std::vector<std::string> out;
  std::string tok;
  std::istringstream ss(s);
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

double parse_double(const std::string &key, const std::string &value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception &) {
    throw FormatError("config key '" + key + "': '" + value + "' is not a number");
  }
}

long long parse_int(const std::string &key, const std::string &value) {
  try {
    size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception &) {
    throw FormatError("config key '" + key + "': '" + value + "' is not an integer");
  }
}

bool parse_bool(const std::string &key, const std::string &value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw FormatError("config key '" + key + "': expected true/false, got '" + value + "'");
}

repr::RepresentationSpec spec_for_kind(repr::Kind kind) {
  switch (kind) {
    case repr::Kind::kWideband: return repr::RepresentationSpec::wideband();
    case repr::Kind::kNarrowband: return repr::RepresentationSpec::narrowband();
    case repr::Kind::kWavelet: return repr::RepresentationSpec::wavelet();
  }
  throw ValueError("unknown representation kind");
}

int stream_rank(repr::Kind kind) {
  switch (kind) {
    case repr::Kind::kWideband: return 0;
    case repr::Kind::kNarrowband: return 1;
    case repr::Kind::kWavelet: return 2;
  }
  return 3;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  ExperimentConfig config;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw FormatError("config '" + path + "' line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    config.set(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
  }
  return config;
}

void ExperimentConfig::set(const std::string &key, const std::string &value) {
  if (key == "representations") {
    representations.clear();
    for (const auto &name : split_list(value))
      representations.push_back(spec_for_kind(repr::kind_from_name(name)));
  } else if (key == "branches") {
    branches = static_cast<int>(parse_int(key, value));
  } else if (key == "fusion") {
    fusion = eval::fusion_from_name(value);
  } else if (key == "classifier") {
    classifier = eval::classifier_from_name(value);
  } else if (key == "feature_set") {
    feature_set = cae::feature_set_from_name(value);
  } else if (key == "seed") {
    seed = static_cast<uint64_t>(parse_int(key, value));
  } else if (key == "ae.epochs") {
    cae.epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "ae.batch_size") {
    cae.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "ae.patience") {
    cae.patience = static_cast<int>(parse_int(key, value));
  } else if (key == "ae.learning_rate") {
    cae.learning_rate = parse_double(key, value);
  } else if (key == "ae.bottleneck_dim") {
    cae.bottleneck_dim = static_cast<int>(parse_int(key, value));
  } else if (key == "ae.post_concat_channels") {
    cae.post_concat_channels = static_cast<int>(parse_int(key, value));
  } else if (key == "ae.channels") {
    const auto parts = split_list(value);
    if (parts.size() != 3)
      throw FormatError("config key 'ae.channels' expects three comma-separated integers");
    cae.channels_per_stage.clear();
    for (const auto &p : parts)
      cae.channels_per_stage.push_back(static_cast<int>(parse_int(key, p)));
  } else if (key == "ae.valid_fraction") {
    ae_valid_fraction = parse_double(key, value);
  } else if (key == "svm.c_grid") {
    svm_c_grid.clear();
    for (const auto &p : split_list(value)) svm_c_grid.push_back(parse_double(key, p));
  } else if (key == "svm.gamma_grid") {
    svm_gamma_grid.clear();
    for (const auto &p : split_list(value)) svm_gamma_grid.push_back(parse_double(key, p));
  } else if (key == "mlp.hidden1") {
    mlp.hidden1 = static_cast<int>(parse_int(key, value));
  } else if (key == "mlp.hidden2") {
    mlp.hidden2 = static_cast<int>(parse_int(key, value));
  } else if (key == "mlp.dropout") {
    mlp.dropout = parse_double(key, value);
  } else if (key == "mlp.max_epochs") {
    mlp.max_epochs = static_cast<int>(parse_int(key, value));
  } else if (key == "mlp.batch_size") {
    mlp.batch_size = static_cast<int>(parse_int(key, value));
  } else if (key == "mlp.learning_rate") {
    mlp.learning_rate = parse_double(key, value);
  } else if (key == "cv.outer_folds") {
    outer_folds = static_cast<int>(parse_int(key, value));
  } else if (key == "cv.inner_folds") {
    inner_folds = static_cast<int>(parse_int(key, value));
  } else if (key == "cv.aggregate_by_utterance_first") {
    aggregate_by_utterance_first = parse_bool(key, value);
  } else {
    throw FormatError("unknown config key '" + key + "'");
  }
}

void ExperimentConfig::finalize() {
  if (representations.empty()) {
    if (fusion == eval::FusionMode::kNone) {
      representations.push_back(repr::RepresentationSpec::narrowband());
    } else {
      const int b = branches > 0 ? branches : 2;
      if (b < 2 || b > 3)
        throw ValueError("config: fusion modes need branches 2 or 3, got " +
                         std::to_string(b));
      representations.push_back(repr::RepresentationSpec::wideband());
      representations.push_back(repr::RepresentationSpec::narrowband());
      if (b == 3) representations.push_back(repr::RepresentationSpec::wavelet());
    }
  }

  std::sort(representations.begin(), representations.end(),
            [](const auto &a, const auto &b) { return stream_rank(a.kind) < stream_rank(b.kind); });
  for (size_t i = 1; i < representations.size(); ++i)
    if (representations[i].kind == representations[i - 1].kind)
      throw ValueError("config: duplicate representation '" +
                       repr::kind_name(representations[i].kind) + "'");

  if (branches > 0 && branches != static_cast<int>(representations.size()))
    throw ValueError("config: branches=" + std::to_string(branches) + " but " +
                     std::to_string(representations.size()) + " representations given");

  const size_t n = representations.size();
  switch (fusion) {
    case eval::FusionMode::kNone:
      if (n != 1) throw ValueError("config: fusion=none needs exactly one representation");
      break;
    case eval::FusionMode::kEarly:
    case eval::FusionMode::kLate:
    case eval::FusionMode::kMultispectral:
      if (n < 2)
        throw ValueError("config: fusion=" + eval::fusion_name(fusion) +
                         " needs at least two representations");
      break;
  }
  if (ae_valid_fraction <= 0.0 || ae_valid_fraction >= 0.9)
    throw ValueError("config: ae.valid_fraction must be in (0, 0.9)");
  if (svm_c_grid.empty() || svm_gamma_grid.empty())
    throw ValueError("config: empty SVM grids");
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "representations=";
  for (size_t i = 0; i < representations.size(); ++i) {
    if (i) out << ",";
    out << repr::kind_name(representations[i].kind);
  }
  out << "\nfusion=" << eval::fusion_name(fusion)
      << "\nclassifier=" << eval::classifier_name(classifier)
      << "\nfeature_set=" << cae::feature_set_name(feature_set) << "\nseed=" << seed
      << "\nae.channels=" << cae.channels_per_stage[0] << "," << cae.channels_per_stage[1]
      << "," << cae.channels_per_stage[2]
      << "\nae.post_concat_channels=" << cae.post_concat_channels
      << "\nae.bottleneck_dim=" << cae.bottleneck_dim << "\nae.epochs=" << cae.epochs
      << "\nae.batch_size=" << cae.batch_size << "\nae.patience=" << cae.patience
      << "\nae.learning_rate=" << cae.learning_rate
      << "\nae.valid_fraction=" << ae_valid_fraction << "\nsvm.c_grid=";
  for (size_t i = 0; i < svm_c_grid.size(); ++i) {
    if (i) out << ",";
    out << svm_c_grid[i];
  }
  out << "\nsvm.gamma_grid=";
  for (size_t i = 0; i < svm_gamma_grid.size(); ++i) {
    if (i) out << ",";
    out << svm_gamma_grid[i];
  }
  out << "\nmlp=" << mlp.hidden1 << "/" << mlp.hidden2 << "/" << mlp.dropout << "/"
      << mlp.max_epochs << "/" << mlp.batch_size << "/" << mlp.learning_rate
      << "\ncv=" << outer_folds << "/" << inner_folds << "/"
      << (aggregate_by_utterance_first ? 1 : 0) << "\n";
  return out.str();
}

std::string ExperimentConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(canonical_text()));
  return std::string(buf);
}

eval::CvOptions ExperimentConfig::cv_options() const {
  eval::CvOptions opt;
  opt.outer_folds = outer_folds;
  opt.inner_folds = inner_folds;
  opt.classifier = classifier;
  opt.fusion = fusion;
  opt.svm_c_grid = svm_c_grid;
  opt.svm_gamma_grid = svm_gamma_grid;
  opt.mlp = mlp;
  opt.aggregate_by_utterance_first = aggregate_by_utterance_first;
  opt.seed = seed;
  return opt;
}

ImageStore compute_images(const Manifest &manifest,
                          const std::vector<repr::RepresentationSpec> &specs) {
  if (specs.empty()) throw ValueError("compute_images: no representations selected");
  ImageStore store;
  store.specs = specs;
  store.cohort = manifest.cohort();
  store.images.resize(specs.size());

  for (const auto &row : manifest.rows) {
    audio::AudioClip clip = audio::load_audio(row.audio_path);
    clip.speaker_id = row.speaker_id;
    clip.utterance_id = row.utterance_id;

    std::optional<std::vector<double>> alignments;
    if (row.alignment_path.has_value())
      alignments = audio::read_alignment_file(*row.alignment_path);

    const std::vector<audio::Segment> segments = audio::segment_aligned(clip, alignments);
    for (size_t si = 0; si < segments.size(); ++si) {
      eval::SampleMeta meta;
      meta.speaker_id = row.speaker_id;
      meta.utterance_id = row.utterance_id;
      meta.segment_index = static_cast<int>(si);
      meta.label = row.label;
      meta.severity = row.severity;
      store.samples.push_back(meta);

      for (size_t s = 0; s < specs.size(); ++s) {
        repr::TimeFreqImage image = repr::compute_image(segments[si], specs[s]);
        image.segment_index = static_cast<int>(si);
        image.speaker_id = row.speaker_id;
        image.utterance_id = row.utterance_id;
        store.images[s].push_back(std::move(image));
      }
    }
  }
  if (store.samples.empty()) throw ValueError("compute_images: no segments produced");
  return store;
}

namespace {

constexpr char kImageMagic[5] = "MSPI";
constexpr uint32_t kImageVersion = 1;

void put_meta(io::ByteWriter &w, const eval::SampleMeta &m) {
  w.str(m.speaker_id);
  w.str(m.utterance_id);
  w.i32(m.segment_index);
  w.i32(m.label);
  w.u8(m.severity.has_value() ? 1 : 0);
  if (m.severity.has_value()) w.f64(*m.severity);
}

eval::SampleMeta get_meta(io::ByteReader &r) {
  eval::SampleMeta m;
  m.speaker_id = r.str();
  m.utterance_id = r.str();
  m.segment_index = r.i32();
  m.label = r.i32();
  if (r.u8()) m.severity = r.f64();
  return m;
}

void write_framed(const std::string &path, io::ByteWriter &w) {
  const uint32_t checksum = io::crc32(w.bytes().data(), w.bytes().size());
  w.u32(checksum);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char *>(w.bytes().data()),
              static_cast<std::streamsize>(w.bytes().size()));
    if (!out) throw IoError("short write to '" + tmp + "'");
  }
  fs::rename(tmp, path);
}

std::vector<uint8_t> read_framed(const std::string &path, const char *magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || !std::equal(magic, magic + 4, bytes.begin()))
    throw FormatError("'" + path + "' has the wrong file magic");
  const size_t body = bytes.size() - 4;
  uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) stored |= static_cast<uint32_t>(bytes[body + i]) << (8 * i);
  if (io::crc32(bytes.data(), body) != stored)
    throw FormatError("'" + path + "' failed its checksum (corrupt or truncated)");
  bytes.resize(body);
  return bytes;
}

}  // namespace

void save_images(const ImageStore &store, const std::string &path) {
  io::ByteWriter w;
  w.bytes().insert(w.bytes().end(), kImageMagic, kImageMagic + 4);
  w.u32(kImageVersion);
  w.u32(static_cast<uint32_t>(store.specs.size()));
  for (const auto &spec : store.specs) {
    w.str(repr::kind_name(spec.kind));
    w.f64(spec.window_ms);
    w.f64(spec.shift_ms);
    w.i32(spec.n_bands);
  }
  w.u32(static_cast<uint32_t>(store.samples.size()));
  for (size_t i = 0; i < store.samples.size(); ++i) {
    put_meta(w, store.samples[i]);
    for (size_t s = 0; s < store.specs.size(); ++s)
      w.f64_vec(store.images[s][i].values.storage());
  }
  write_framed(path, w);
}

ImageStore load_images(const std::string &path) {
  const std::vector<uint8_t> bytes = read_framed(path, kImageMagic);
  io::ByteReader r(bytes.data() + 4, bytes.size() - 4);
  if (r.u32() > kImageVersion)
    throw FormatError("'" + path + "' has an unsupported image-store version");

  ImageStore store;
  const uint32_t n_specs = r.u32();
  for (uint32_t s = 0; s < n_specs; ++s) {
    repr::RepresentationSpec spec;
    spec.kind = repr::kind_from_name(r.str());
    spec.window_ms = r.f64();
    spec.shift_ms = r.f64();
    spec.n_bands = r.i32();
    store.specs.push_back(spec);
  }
  store.images.resize(store.specs.size());
  const uint32_t n_samples = r.u32();
  for (uint32_t i = 0; i < n_samples; ++i) {
    store.samples.push_back(get_meta(r));
    for (uint32_t s = 0; s < n_specs; ++s) {
      const std::vector<double> values = r.f64_vec();
      if (values.size() !=
          static_cast<size_t>(repr::kImageRows) * static_cast<size_t>(repr::kImageCols))
        throw FormatError("'" + path + "' contains an image with the wrong size");
      repr::TimeFreqImage image;
      image.values = Matrix(repr::kImageRows, repr::kImageCols);
      image.values.storage() = values;
      image.spec = store.specs[s];
      image.speaker_id = store.samples.back().speaker_id;
      image.utterance_id = store.samples.back().utterance_id;
      image.segment_index = store.samples.back().segment_index;
      store.images[s].push_back(std::move(image));
    }
  }

  // rebuild the cohort from the sample metadata
  std::set<std::string> seen;
  for (const auto &m : store.samples) {
    if (seen.insert(m.speaker_id).second)
      store.cohort.speakers.push_back({m.speaker_id, m.label, m.severity});
  }
  return store;
}

namespace {

// stream indices (into store.specs) per autoencoder unit
std::vector<std::vector<size_t>> unit_layout(const ImageStore &store,
                                             const ExperimentConfig &config) {
  std::vector<size_t> all(store.specs.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;

  if (config.fusion == eval::FusionMode::kMultispectral) return {all};
  std::vector<std::vector<size_t>> units;
  for (const size_t i : all) units.push_back({i});
  return units;
}

}  // namespace

std::vector<TrainedUnit> train_ae_units(const ImageStore &store,
                                        const ExperimentConfig &config,
                                        const std::vector<std::string> &train_speakers,
                                        uint64_t seed) {
  if (store.specs.size() != config.representations.size())
    throw ValueError("train_ae_units: image store does not match the configured streams");

  // speaker-grouped AE validation split, shared across units
  std::vector<std::string> speakers = train_speakers;
  std::sort(speakers.begin(), speakers.end());
  Rng split_rng = make_rng(seed, "ae_split");
  std::shuffle(speakers.begin(), speakers.end(), split_rng);
  size_t n_valid = static_cast<size_t>(config.ae_valid_fraction * speakers.size());
  n_valid = std::max<size_t>(1, std::min(n_valid, speakers.size() - 1));
  const std::set<std::string> valid_speakers(speakers.begin(),
                                             speakers.begin() + static_cast<long>(n_valid));
  const std::set<std::string> train_set(speakers.begin(), speakers.end());

  std::vector<TrainedUnit> units;
  const auto layout = unit_layout(store, config);
  for (size_t u = 0; u < layout.size(); ++u) {
    TrainedUnit unit;
    unit.config = config.cae;
    unit.config.branch_specs.clear();
    for (const size_t s : layout[u]) unit.config.branch_specs.push_back(store.specs[s]);

    unit.graph = cae::build_cae(unit.config);
    nn::init_parameters(unit.graph,
                        derive_seed(seed, "ae_init_unit" + std::to_string(u)));

    std::vector<cae::ImageSample> train, valid;
    for (size_t i = 0; i < store.samples.size(); ++i) {
      const auto &meta = store.samples[i];
      if (!train_set.count(meta.speaker_id)) continue;
      cae::ImageSample sample;
      sample.speaker_id = meta.speaker_id;
      sample.utterance_id = meta.utterance_id;
      sample.segment_index = meta.segment_index;
      for (const size_t s : layout[u]) sample.branch_images.push_back(&store.images[s][i]);
      (valid_speakers.count(meta.speaker_id) ? valid : train).push_back(std::move(sample));
    }

    unit.report = cae::train_autoencoder(unit.graph, train, valid, unit.config,
                                         derive_seed(seed, "ae_train_unit" + std::to_string(u)));
    units.push_back(std::move(unit));
  }
  return units;
}

eval::FeatureMatrix unit_features(const TrainedUnit &unit, const ImageStore &store,
                                  cae::FeatureSet feature_set, int batch_size) {
  // map unit branches onto store streams by representation kind
  std::vector<size_t> stream_of_branch;
  for (const auto &spec : unit.config.branch_specs) {
    bool found = false;
    for (size_t s = 0; s < store.specs.size(); ++s) {
      if (store.specs[s].kind == spec.kind) {
        stream_of_branch.push_back(s);
        found = true;
        break;
      }
    }
    if (!found)
      throw ValueError("unit_features: store lacks representation '" +
                       repr::kind_name(spec.kind) + "'");
  }

  std::vector<cae::ImageSample> samples(store.samples.size());
  for (size_t i = 0; i < store.samples.size(); ++i) {
    samples[i].speaker_id = store.samples[i].speaker_id;
    samples[i].utterance_id = store.samples[i].utterance_id;
    samples[i].segment_index = store.samples[i].segment_index;
    for (const size_t s : stream_of_branch)
      samples[i].branch_images.push_back(&store.images[s][i]);
  }

  const std::vector<cae::FeatureVector> features =
      cae::extract_features_batch(unit.graph, samples, unit.config, batch_size);
  eval::FeatureMatrix rows;
  rows.reserve(features.size());
  for (const auto &fv : features) rows.push_back(cae::flatten_features(fv, feature_set));
  return rows;
}

CaeFoldProvider::CaeFoldProvider(const ImageStore &store, const ExperimentConfig &config)
    : store_(store), config_(config) {}

int CaeFoldProvider::stream_count() const {
  return config_.fusion == eval::FusionMode::kMultispectral
             ? 1
             : static_cast<int>(store_.specs.size());
}

std::vector<eval::FeatureMatrix> CaeFoldProvider::features_for_fold(
    const std::vector<std::string> &train_speakers, int fold_index,
    eval::LeakageRecord *record) {
  const uint64_t fold_seed =
      derive_seed(config_.seed, "cae_fold_" + std::to_string(fold_index));
  const std::vector<TrainedUnit> units =
      train_ae_units(store_, config_, train_speakers, fold_seed);
  if (record != nullptr) record->ae_train_speakers = train_speakers;

  std::vector<eval::FeatureMatrix> streams;
  streams.reserve(units.size());
  for (const auto &unit : units)
    streams.push_back(unit_features(unit, store_, config_.feature_set, config_.cae.batch_size));
  return streams;
}

eval::EvalReport run_experiment(const ImageStore &store, const ExperimentConfig &config) {
  CaeFoldProvider provider(store, config);
  return eval::run_nested_cv(store.cohort, store.samples, provider, config.cv_options());
}

void save_features(const FeatureTable &table, const std::string &path) {
  if (table.blocks.empty()) throw ValueError("save_features: no feature blocks");
  for (const auto &block : table.blocks)
    if (block.size() != table.samples.size())
      throw ValueError("save_features: block size does not match sample count");

  std::ostringstream out;
  out.precision(17);
  out << "speaker,utterance,segment,label,severity";
  for (size_t b = 0; b < table.blocks.size(); ++b)
    for (size_t j = 0; j < table.blocks[b][0].size(); ++j)
      out << ",s" << b << ":f" << j;
  out << "\n";
  for (size_t i = 0; i < table.samples.size(); ++i) {
    const auto &m = table.samples[i];
    out << m.speaker_id << "," << m.utterance_id << "," << m.segment_index << ","
        << (m.label == 1 ? "patient" : "control") << ",";
    if (m.severity.has_value()) out << *m.severity;
    for (const auto &block : table.blocks)
      for (const double v : block[i]) out << "," << v;
    out << "\n";
  }

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp + "'");
    f << out.str();
  }
  fs::rename(tmp, path);
}

FeatureTable load_features(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read features '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("features '" + path + "' is empty");

  const std::vector<std::string> header = split_list(line);
  if (header.size() < 6 || header[0] != "speaker" || header[1] != "utterance" ||
      header[2] != "segment" || header[3] != "label" || header[4] != "severity")
    throw FormatError("features '" + path + "' has an unexpected header");

  // column blocks from the s<k>:f<j> prefixes
  std::vector<int> block_of_col;
  int n_blocks = 0;
  for (size_t c = 5; c < header.size(); ++c) {
    const auto colon = header[c].find(':');
    if (header[c].size() < 4 || header[c][0] != 's' || colon == std::string::npos)
      throw FormatError("features '" + path + "': bad column name '" + header[c] + "'");
    const int b = static_cast<int>(parse_int("column", header[c].substr(1, colon - 1)));
    block_of_col.push_back(b);
    n_blocks = std::max(n_blocks, b + 1);
  }
  if (n_blocks == 0) throw FormatError("features '" + path + "' has no feature columns");

  FeatureTable table;
  table.blocks.resize(static_cast<size_t>(n_blocks));
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    {
      std::string tok;
      std::istringstream ss(line);
      while (std::getline(ss, tok, ',')) fields.push_back(trim(tok));
    }
    if (fields.size() != header.size())
      throw FormatError("features '" + path + "' row " + std::to_string(row_no) +
                        ": wrong field count");

    eval::SampleMeta meta;
    meta.speaker_id = fields[0];
    meta.utterance_id = fields[1];
    meta.segment_index = static_cast<int>(parse_int("segment", fields[2]));
    if (fields[3] == "patient") meta.label = 1;
    else if (fields[3] == "control") meta.label = -1;
    else
      throw FormatError("features '" + path + "' row " + std::to_string(row_no) +
                        ": bad label '" + fields[3] + "'");
    if (!fields[4].empty()) meta.severity = parse_double("severity", fields[4]);
    table.samples.push_back(std::move(meta));

    std::vector<std::vector<double>> row_blocks(static_cast<size_t>(n_blocks));
    for (size_t c = 5; c < fields.size(); ++c)
      row_blocks[static_cast<size_t>(block_of_col[c - 5])].push_back(
          parse_double("feature", fields[c]));
    for (int b = 0; b < n_blocks; ++b)
      table.blocks[static_cast<size_t>(b)].push_back(std::move(row_blocks[static_cast<size_t>(b)]));
  }
  if (table.samples.empty()) throw FormatError("features '" + path + "' has no rows");
  return table;
}

}  // namespace mspec::pipeline
