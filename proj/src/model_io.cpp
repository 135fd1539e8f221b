#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emoji/classifier.hpp"
#include "emoji/error.hpp"

namespace emoji {

using nlohmann::ordered_json;

namespace {

constexpr char kMagic[4] = {'E', 'M', 'O', 'J'};
constexpr std::size_t kHeaderSize = 4 + 1 + 4;

// One tensor blob in directory order.
struct TensorRef {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::string dtype;  // "float32" | "int8"
  std::size_t nbytes = 0;
};

std::vector<TensorRef> directory(const ClassifierModel& model) {
  std::vector<TensorRef> dir;
  auto add_matrix = [&dir](const std::string& name, const Matrix& m) {
    const std::size_t n = std::size_t{m.rows} * m.cols;
    if (m.quantized()) {
      dir.push_back({name, {m.rows, m.cols}, "int8", n});
      dir.push_back({name + ".scales", {m.rows}, "float32", std::size_t{m.rows} * 4});
    } else {
      dir.push_back({name, {m.rows, m.cols}, "float32", n * 4});
    }
  };
  auto add_bias = [&dir](const std::string& name, const std::vector<float>& b) {
    dir.push_back({name, {static_cast<std::uint32_t>(b.size())}, "float32", b.size() * 4});
  };
  add_matrix("embedding", model.embedding);
  for (std::size_t l = 0; l < model.hidden.size(); ++l) {
    add_matrix("hidden." + std::to_string(l) + ".weight", model.hidden[l].weights);
    add_bias("hidden." + std::to_string(l) + ".bias", model.hidden[l].bias);
  }
  add_matrix("output.weight", model.output.weights);
  add_bias("output.bias", model.output.bias);
  return dir;
}

std::string metadata(const ClassifierModel& model, const std::vector<TensorRef>& dir) {
  ordered_json meta;
  meta["architecture"] = {{"embedding_dim", model.architecture.embedding_dim},
                          {"hidden_layers", model.architecture.hidden_layers},
                          {"hidden_dim", model.architecture.hidden_dim},
                          {"n_classes", model.architecture.n_classes}};
  meta["featurizer"] = {{"hash", std::string(kFeatureHashName)},
                        {"n_buckets", model.featurizer.n_buckets},
                        {"use_bigrams", model.featurizer.use_bigrams},
                        {"max_tokens", model.featurizer.max_tokens}};
  ordered_json classes = ordered_json::array();
  for (const auto& c : model.class_ids) classes.push_back(c.str());
  meta["classes"] = std::move(classes);
  meta["precision"] = std::string(to_string(model.precision));
  ordered_json tensors = ordered_json::array();
  std::size_t offset = 0;
  for (const auto& t : dir) {
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"dtype", t.dtype}, {"offset", offset}, {"nbytes", t.nbytes}});
    offset += t.nbytes;
  }
  meta["tensors"] = std::move(tensors);
  return meta.dump();
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_floats(std::vector<std::uint8_t>& out, const std::vector<float>& values) {
  for (float f : values) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    put_u32(out, bits);
  }
}

void put_matrix(std::vector<std::uint8_t>& out, const Matrix& m) {
  if (m.quantized()) {
    for (std::int8_t v : m.q) out.push_back(static_cast<std::uint8_t>(v));
    put_floats(out, m.scales);
  } else {
    put_floats(out, m.data);
  }
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}

class BlobReader {
 public:
  BlobReader(const std::vector<std::uint8_t>& bytes, std::size_t base, const ordered_json& tensors)
      : bytes_(bytes), base_(base), tensors_(tensors) {}

  std::vector<float> floats(const std::string& name, std::size_t count) {
    const std::uint8_t* p = locate(name, "float32", count * 4);
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::bit_cast<float>(get_u32(p + 4 * i));
    return out;
  }

  std::vector<std::int8_t> int8s(const std::string& name, std::size_t count) {
    const std::uint8_t* p = locate(name, "int8", count);
    std::vector<std::int8_t> out(count);
    std::memcpy(out.data(), p, count);
    return out;
  }

  Matrix matrix(const std::string& name, std::uint32_t rows, std::uint32_t cols, bool quantized) {
    Matrix m;
    m.rows = rows;
    m.cols = cols;
    const std::size_t n = std::size_t{rows} * cols;
    if (quantized) {
      m.q = int8s(name, n);
      m.scales = floats(name + ".scales", rows);
    } else {
      m.data = floats(name, n);
    }
    return m;
  }

 private:
  const std::uint8_t* locate(const std::string& name, const char* dtype, std::size_t nbytes) {
    for (const auto& t : tensors_) {
      if (t.at("name").get<std::string>() != name) continue;
      if (t.at("dtype").get<std::string>() != dtype || t.at("nbytes").get<std::size_t>() != nbytes)
        throw Error("model container: tensor " + name + " has unexpected dtype or size");
      const std::size_t offset = t.at("offset").get<std::size_t>();
      if (base_ + offset + nbytes > bytes_.size()) throw TruncatedContainerError("tensor " + name);
      return bytes_.data() + base_ + offset;
    }
    throw Error("model container: missing tensor " + name);
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t base_;
  const ordered_json& tensors_;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const ClassifierModel& model) {
  model.validate();
  const auto dir = directory(model);
  const std::string meta = metadata(model, dir);
  std::vector<std::uint8_t> out;
  std::size_t total = kHeaderSize + meta.size();
  for (const auto& t : dir) total += t.nbytes;
  out.reserve(total);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  out.push_back(kContainerVersion);
  put_u32(out, static_cast<std::uint32_t>(meta.size()));
  out.insert(out.end(), meta.begin(), meta.end());
  put_matrix(out, model.embedding);
  for (const auto& h : model.hidden) {
    put_matrix(out, h.weights);
    put_floats(out, h.bias);
  }
  put_matrix(out, model.output.weights);
  put_floats(out, model.output.bias);
  return out;
}

ClassifierModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4) throw TruncatedContainerError("missing header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw BadMagicError();
  if (bytes.size() < kHeaderSize) throw TruncatedContainerError("missing header");
  if (bytes[4] != kContainerVersion) throw UnsupportedVersionError(bytes[4]);
  const std::uint32_t meta_len = get_u32(bytes.data() + 5);
  if (kHeaderSize + std::size_t{meta_len} > bytes.size()) throw TruncatedContainerError("metadata block");

  ordered_json meta;
  try {
    meta = ordered_json::parse(bytes.begin() + kHeaderSize, bytes.begin() + kHeaderSize + meta_len);
  } catch (const ordered_json::exception& e) {
    throw Error(std::string("model container: bad metadata: ") + e.what());
  }

  ClassifierModel model;
  try {
    const auto& arch = meta.at("architecture");
    model.architecture.embedding_dim = arch.at("embedding_dim").get<std::uint32_t>();
    model.architecture.hidden_layers = arch.at("hidden_layers").get<std::uint32_t>();
    model.architecture.hidden_dim = arch.at("hidden_dim").get<std::uint32_t>();
    model.architecture.n_classes = arch.at("n_classes").get<std::uint32_t>();
    const auto& feat = meta.at("featurizer");
    if (feat.at("hash").get<std::string>() != kFeatureHashName)
      throw Error("model container: unsupported feature hash " + feat.at("hash").get<std::string>());
    model.featurizer.n_buckets = feat.at("n_buckets").get<std::uint32_t>();
    model.featurizer.use_bigrams = feat.at("use_bigrams").get<bool>();
    model.featurizer.max_tokens = feat.at("max_tokens").get<std::uint32_t>();
    for (const auto& c : meta.at("classes")) model.class_ids.emplace_back(c.get<std::string>());
    const std::string precision = meta.at("precision").get<std::string>();
    if (precision == "float32") {
      model.precision = Precision::kFloat32;
    } else if (precision == "int8_weights") {
      model.precision = Precision::kInt8Weights;
    } else {
      throw Error("model container: unknown precision " + precision);
    }
    model.architecture.validate();
    model.featurizer.validate();

    const bool q = model.precision == Precision::kInt8Weights;
    BlobReader reader(bytes, kHeaderSize + meta_len, meta.at("tensors"));
    const auto& a = model.architecture;
    model.embedding = reader.matrix("embedding", model.featurizer.n_buckets, a.embedding_dim, q);
    std::uint32_t in = a.embedding_dim;
    for (std::uint32_t l = 0; l < a.hidden_layers; ++l) {
      const std::string prefix = "hidden." + std::to_string(l);
      DenseLayer layer{reader.matrix(prefix + ".weight", a.hidden_dim, in, q), reader.floats(prefix + ".bias", a.hidden_dim)};
      model.hidden.push_back(std::move(layer));
      in = a.hidden_dim;
    }
    model.output = {reader.matrix("output.weight", a.n_classes, in, q), reader.floats("output.bias", a.n_classes)};
  } catch (const ordered_json::exception& e) {
    throw Error(std::string("model container: bad metadata: ") + e.what());
  }
  model.validate();
  return model;
}

void save_model(const ClassifierModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

std::string model_version(const std::vector<std::uint8_t>& container) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::uint8_t b : container) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

ModelSizeReport model_size_report(const ClassifierModel& model) {
  const auto dir = directory(model);
  std::size_t bytes = kHeaderSize + metadata(model, dir).size();
  for (const auto& t : dir) bytes += t.nbytes;
  return {bytes, model.parameter_count(), model.precision};
}

}  // namespace emoji
