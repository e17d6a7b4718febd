#include "geoctx/nn/param_store.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "geoctx/csv.hpp"
#include "geoctx/error.hpp"

namespace geoctx::nn {

ParamId ParamStore::add(std::string name, Tensor2 init) {
  if (by_name_.count(name)) throw Error(ErrorKind::BadConfig, "duplicate parameter '" + name + "'");
  const ParamId id = entries_.size();
  Entry e;
  e.name = name;
  e.grad = Tensor2::Zero(init.rows(), init.cols());
  e.m = e.grad;
  e.v = e.grad;
  e.value = std::move(init);
  entries_.push_back(std::move(e));
  by_name_.emplace(std::move(name), id);
  return id;
}

ParamId ParamStore::id(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) throw Error(ErrorKind::BadConfig, "no parameter '" + std::string(name) + "'");
  return it->second;
}

bool ParamStore::contains(std::string_view name) const { return by_name_.count(std::string(name)) > 0; }

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.grad.setZero();
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += static_cast<std::size_t>(e.value.size());
  return n;
}

std::vector<Tensor2> ParamStore::snapshot() const {
  std::vector<Tensor2> out;
  out.reserve(entries_.size());
  for (const auto& e : entries_) out.push_back(e.value);
  return out;
}

void ParamStore::restore(const std::vector<Tensor2>& values) {
  if (values.size() != entries_.size()) throw Error(ErrorKind::ShapeMismatch, "snapshot size");
  for (std::size_t i = 0; i < values.size(); ++i) {
    require_shape(values[i], entries_[i].value.rows(), entries_[i].value.cols(), entries_[i].name);
    entries_[i].value = values[i];
  }
}

void adam_step(ParamStore& params, double lr, double beta1, double beta2, double eps) {
  const auto t = static_cast<double>(params.step_ + 1);
  const double c1 = 1.0 - std::pow(beta1, t);
  const double c2 = 1.0 - std::pow(beta2, t);
  for (auto& e : params.entries_) {
    e.m = beta1 * e.m + (1.0 - beta1) * e.grad;
    e.v = beta2 * e.v + (1.0 - beta2) * e.grad.cwiseProduct(e.grad);
    e.value.array() -= lr * (e.m.array() / c1) / ((e.v.array() / c2).sqrt() + eps);
  }
  ++params.step_;
}

namespace {

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

double get_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

class CheckpointAccess {
 public:
  static const std::vector<ParamStore::Entry>& entries(const ParamStore& p) { return p.entries_; }
  static void set_step(ParamStore& p, std::uint64_t s) { p.step_ = s; }
};

void save_checkpoint(const ParamStore& params, const std::filesystem::path& dir,
                     std::string_view metadata_json) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  nlohmann::json manifest;
  manifest["format"] = "geoctx-params-v1";
  manifest["dtype"] = "float64-le";
  manifest["step"] = params.step();
  manifest["metadata"] = nlohmann::json::parse(metadata_json);
  nlohmann::json tensors = nlohmann::json::array();
  std::string blob;
  for (const auto& e : CheckpointAccess::entries(params)) {
    tensors.push_back({{"name", e.name},
                       {"rows", e.value.rows()},
                       {"cols", e.value.cols()},
                       {"offset", blob.size()}});
    for (Eigen::Index i = 0; i < e.value.size(); ++i) put_le(blob, e.value.data()[i]);
  }
  manifest["tensors"] = std::move(tensors);
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  write_text_file(dir / "params.bin", blob);
}

ParamStore load_checkpoint(const std::filesystem::path& dir, std::string* metadata_json) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::IoFailure, std::string("bad checkpoint manifest: ") + e.what());
  }
  const std::string blob = read_text_file(dir / "params.bin");
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  ParamStore store;
  std::size_t offset = 0;
  for (const auto& t : manifest.at("tensors")) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    const auto n = static_cast<std::size_t>(rows * cols);
    if (offset + n * 8 > blob.size()) throw Error(ErrorKind::IoFailure, "truncated params.bin");
    Tensor2 v(rows, cols);
    for (std::size_t i = 0; i < n; ++i) v.data()[i] = get_le(bytes + offset + 8 * i);
    offset += n * 8;
    store.add(t.at("name").get<std::string>(), std::move(v));
  }
  if (offset != blob.size()) throw Error(ErrorKind::IoFailure, "params.bin has trailing bytes");
  CheckpointAccess::set_step(store, manifest.value("step", std::uint64_t{0}));
  if (metadata_json) *metadata_json = manifest.value("metadata", nlohmann::json::object()).dump();
  return store;
}

}  // namespace geoctx::nn
