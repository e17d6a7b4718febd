#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "geoctx/nn/tensor.hpp"

namespace geoctx::nn {

using ParamId = std::size_t;

// Named parameters with matching gradient and Adam moment buffers, kept in
// insertion order. Ids stay valid for the lifetime of the store.
class ParamStore {
 public:
  ParamId add(std::string name, Tensor2 init);

  std::size_t size() const { return entries_.size(); }
  ParamId id(std::string_view name) const;  // throws BadConfig
  bool contains(std::string_view name) const;
  const std::string& name(ParamId id) const { return entries_[id].name; }

  Tensor2& value(ParamId id) { return entries_[id].value; }
  const Tensor2& value(ParamId id) const { return entries_[id].value; }
  Tensor2& grad(ParamId id) { return entries_[id].grad; }
  const Tensor2& grad(ParamId id) const { return entries_[id].grad; }

  void zero_grad();
  std::size_t parameter_count() const;

  std::uint64_t step() const { return step_; }

  // Parameter values only; used to retain best-on-validation weights.
  std::vector<Tensor2> snapshot() const;
  void restore(const std::vector<Tensor2>& values);

 private:
  friend void adam_step(ParamStore&, double, double, double, double);
  friend class CheckpointAccess;

  struct Entry {
    std::string name;
    Tensor2 value;
    Tensor2 grad;
    Tensor2 m;
    Tensor2 v;
  };
  std::vector<Entry> entries_;
  std::unordered_map<std::string, ParamId> by_name_;
  std::uint64_t step_ = 0;
};

// Bias-corrected Adam update over every parameter, then step += 1.
void adam_step(ParamStore& params, double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

// Checkpoint directory: manifest.json (names, shapes, byte offsets, optional
// metadata object) and params.bin (little-endian float64, manifest order).
void save_checkpoint(const ParamStore& params, const std::filesystem::path& dir,
                     std::string_view metadata_json = "{}");
ParamStore load_checkpoint(const std::filesystem::path& dir, std::string* metadata_json = nullptr);

}  // namespace geoctx::nn
