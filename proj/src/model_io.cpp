#include "snakesynth/model_io.hpp"

#include <bit>
#include <set>

#include "snakesynth/hash.hpp"

namespace snakesynth {
namespace {

// Integers and doubles travel as 16-bit chunks, each exact in a float.
void pack_u64(std::uint64_t v, std::vector<float>& out) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<float>((v >> (16 * k)) & 0xFFFFu));
}

std::uint64_t unpack_u64(std::span<const float> v, const std::string& name) {
  std::uint64_t out = 0;
  for (int k = 0; k < 4; ++k) {
    const float f = v[static_cast<std::size_t>(k)];
    if (!(f >= 0.0f && f <= 65535.0f) || f != static_cast<float>(static_cast<std::uint32_t>(f))) {
      throw ModelFormatError("record " + name + " holds a malformed integer");
    }
    out |= static_cast<std::uint64_t>(f) << (16 * k);
  }
  return out;
}

Record u64_record(std::string name, std::uint64_t v) {
  Record r{std::move(name), {4}, {}};
  pack_u64(v, r.values);
  return r;
}

const Record& need(const RecordFile& f, const std::string& name) {
  const Record* r = f.find(name);
  if (!r) throw ModelFormatError("model file has no record " + name);
  return *r;
}

std::uint64_t read_u64(const RecordFile& f, const std::string& name) {
  const Record& r = need(f, name);
  if (r.extents != Shape{4}) throw ModelFormatError("record " + name + " has shape " + shape_string(r.extents));
  return unpack_u64(r.values, name);
}

Record tensor_record(std::string name, const Tensor<float>& t) {
  const auto d = t.data();
  return {std::move(name), t.shape(), std::vector<float>(d.begin(), d.end())};
}

void read_tensor(const RecordFile& f, const std::string& name, Tensor<float>& dst) {
  const Record& r = need(f, name);
  if (r.extents != dst.shape()) {
    throw ModelFormatError("record " + name + " has shape " + shape_string(r.extents) + ", expected " +
                           shape_string(dst.shape()));
  }
  dst = Tensor<float>(r.extents, r.values);
}

template <typename State>
auto scopes(State& s) {
  using Params = decltype(s.generator.parameters());
  return std::vector<std::pair<std::string, Params>>{{"generator", s.generator.parameters()},
                                                      {"discriminator", s.discriminator.parameters()}};
}

template <typename Gen>
auto bn_stats(Gen& g) {
  using Ptr = decltype(&g.bn1_stats);
  return std::vector<std::pair<std::string, Ptr>>{{"generator/bn1", &g.bn1_stats}, {"generator/bn2", &g.bn2_stats}};
}

}  // namespace

std::uint64_t model_config_hash(const AudioConfig& audio) {
  Fnv1a h;
  h.update(audio.canonical());
  const TrainState probe;
  for (const Parameter<float>* p : probe.generator.parameters()) h.update(p->name + shape_string(p->value.shape()));
  for (const Parameter<float>* p : probe.discriminator.parameters()) h.update(p->name + shape_string(p->value.shape()));
  return h.digest();
}

RecordFile model_records(const TrainState& state, const AudioConfig& audio, bool include_training) {
  RecordFile f;
  f.magic = kModelMagic;
  f.version = kModelVersion;
  f.config_hash = model_config_hash(audio);
  for (const auto& [prefix, params] : scopes(state)) {
    for (const Parameter<float>* p : params) f.records.push_back(tensor_record(prefix + "/" + p->name, p->value));
  }
  for (const auto& [name, stats] : bn_stats(state.generator)) {
    f.records.push_back(tensor_record(name + "/mean", stats->mean));
    f.records.push_back(tensor_record(name + "/var", stats->var));
    f.records.push_back(u64_record(name + "/updates", stats->updates));
  }
  if (!include_training) return f;

  for (const auto& [prefix, params] : scopes(state)) {
    for (const Parameter<float>* p : params) {
      const std::string key = prefix + "/" + p->name;
      f.records.push_back(tensor_record("train/adam_m/" + key, p->adam_m));
      f.records.push_back(tensor_record("train/adam_v/" + key, p->adam_v));
      f.records.push_back(u64_record("train/steps/" + key, p->step_count));
    }
  }
  f.records.push_back(u64_record("train/epoch", state.epoch));
  f.records.push_back(u64_record("train/seed", state.seed));
  Record losses{"train/loss_history", {state.loss_history.size(), 2, 4}, {}};
  for (const StepLosses& s : state.loss_history) {
    pack_u64(std::bit_cast<std::uint64_t>(s.g_loss), losses.values);
    pack_u64(std::bit_cast<std::uint64_t>(s.d_loss), losses.values);
  }
  f.records.push_back(std::move(losses));
  return f;
}

LoadedModel model_from_records(const RecordFile& f, const AudioConfig& audio) {
  if (f.magic != kModelMagic) throw ModelFormatError("not a model file (bad magic)");
  if (f.version != kModelVersion) {
    throw ModelFormatError("model file version " + std::to_string(f.version) + " is not supported (expected version " +
                           std::to_string(kModelVersion) + ")");
  }
  if (f.config_hash != model_config_hash(audio)) {
    throw ModelFormatError("model was written for a different audio or network configuration");
  }

  LoadedModel out;
  TrainState& state = out.state;
  std::set<std::string> expected;
  for (const auto& [prefix, params] : scopes(state)) {
    for (Parameter<float>* p : params) {
      const std::string key = prefix + "/" + p->name;
      read_tensor(f, key, p->value);
      expected.insert(key);
    }
  }
  for (const auto& [name, stats] : bn_stats(state.generator)) {
    read_tensor(f, name + "/mean", stats->mean);
    read_tensor(f, name + "/var", stats->var);
    stats->updates = read_u64(f, name + "/updates");
    expected.insert({name + "/mean", name + "/var", name + "/updates"});
  }

  bool any_training = false;
  for (const Record& r : f.records) any_training = any_training || r.name.starts_with("train/");
  if (any_training) {
    for (const auto& [prefix, params] : scopes(state)) {
      for (Parameter<float>* p : params) {
        const std::string key = prefix + "/" + p->name;
        read_tensor(f, "train/adam_m/" + key, p->adam_m);
        read_tensor(f, "train/adam_v/" + key, p->adam_v);
        p->step_count = read_u64(f, "train/steps/" + key);
        expected.insert({"train/adam_m/" + key, "train/adam_v/" + key, "train/steps/" + key});
      }
    }
    state.epoch = static_cast<std::size_t>(read_u64(f, "train/epoch"));
    state.seed = read_u64(f, "train/seed");
    const Record& losses = need(f, "train/loss_history");
    if (losses.extents.size() != 3 || losses.extents[1] != 2 || losses.extents[2] != 4) {
      throw ModelFormatError("record train/loss_history has shape " + shape_string(losses.extents));
    }
    const std::span<const float> v(losses.values);
    for (std::size_t i = 0; i < losses.extents[0]; ++i) {
      StepLosses s;
      s.g_loss = std::bit_cast<double>(unpack_u64(v.subspan(i * 8, 4), losses.name));
      s.d_loss = std::bit_cast<double>(unpack_u64(v.subspan(i * 8 + 4, 4), losses.name));
      state.loss_history.push_back(s);
    }
    expected.insert({"train/epoch", "train/seed", "train/loss_history"});
    out.has_training_state = true;
  }
  for (const Record& r : f.records) {
    if (!expected.contains(r.name)) throw ModelFormatError("unexpected record " + r.name);
  }
  if (expected.size() != f.records.size()) throw ModelFormatError("duplicate records in model file");
  return out;
}

void save_model(const std::filesystem::path& path, const TrainState& state, const AudioConfig& audio,
                bool include_training) {
  write_records(path, model_records(state, audio, include_training));
}

LoadedModel load_model(const std::filesystem::path& path, const AudioConfig& audio) {
  return model_from_records(read_records(path), audio);
}

}  // namespace snakesynth
