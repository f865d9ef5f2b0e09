// src/optim.cpp
#include "sfs/optim.h"

#include <cmath>
#include <istream>
#include <ostream>

namespace sfs::optim {

AdamW::AdamW(std::map<std::string, ad::Var> params, double lr, double beta1,
             double beta2, double weight_decay, double eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
      wd_(weight_decay), eps_(eps) {
  for (const auto& [name, p] : params_) {
    Moment mo;
    mo.m = Tensor(p.val().shape);
    mo.v = Tensor(p.val().shape);
    state_.emplace(name, std::move(mo));
  }
}

void AdamW::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (auto& [name, p] : params_) {
    if (!p.has_grad()) continue;
    Moment& mo = state_[name];
    Tensor& value = p.node()->value;
    const Tensor& g = p.grad();
    for (size_t i = 0; i < value.data.size(); ++i) {
      mo.m.data[i] = beta1_ * mo.m.data[i] + (1.0 - beta1_) * g.data[i];
      mo.v.data[i] = beta2_ * mo.v.data[i] + (1.0 - beta2_) * g.data[i] * g.data[i];
      const double mhat = mo.m.data[i] / bc1;
      const double vhat = mo.v.data[i] / bc2;
      value.data[i] -= lr_ * (mhat / (std::sqrt(vhat) + eps_) + wd_ * value.data[i]);
    }
  }
}

void AdamW::zero_grad() {
  for (auto& [name, p] : params_) p.node()->clear_grad();
}

double AdamW::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (auto& [name, p] : params_) {
    if (!p.has_grad()) continue;
    for (double g : p.grad().data) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-12);
    for (auto& [name, p] : params_) {
      if (!p.has_grad()) continue;
      p.node()->grad.scale_(scale);
    }
  }
  return norm;
}

void AdamW::serialize(std::ostream& out) const {
  const uint64_t n = state_.size();
  out.write(reinterpret_cast<const char*>(&t_), 8);
  out.write(reinterpret_cast<const char*>(&n), 8);
  for (const auto& [name, mo] : state_) {
    const uint32_t len = static_cast<uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&len), 4);
    out.write(name.data(), len);
    const uint64_t numel = static_cast<uint64_t>(mo.m.numel());
    out.write(reinterpret_cast<const char*>(&numel), 8);
    out.write(reinterpret_cast<const char*>(mo.m.ptr()), 8 * numel);
    out.write(reinterpret_cast<const char*>(mo.v.ptr()), 8 * numel);
  }
}

void AdamW::deserialize(std::istream& in) {
  uint64_t n = 0;
  in.read(reinterpret_cast<char*>(&t_), 8);
  in.read(reinterpret_cast<char*>(&n), 8);
  for (uint64_t i = 0; i < n; ++i) {
    uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), 4);
    std::string name(len, '\0');
    in.read(name.data(), len);
    uint64_t numel = 0;
    in.read(reinterpret_cast<char*>(&numel), 8);
    auto it = state_.find(name);
    if (it == state_.end() || static_cast<uint64_t>(it->second.m.numel()) != numel)
      throw CorruptCheckpoint("optimizer state mismatch for " + name);
    in.read(reinterpret_cast<char*>(it->second.m.ptr()), 8 * numel);
    in.read(reinterpret_cast<char*>(it->second.v.ptr()), 8 * numel);
  }
  if (!in) throw CorruptCheckpoint("truncated optimizer state");
}

std::map<std::string, ad::Var> select_params(const nn::ParamStore& store,
                                             const std::string& prefix,
                                             bool invert) {
  std::map<std::string, ad::Var> out;
  for (const auto& [name, p] : store.params()) {
    const bool match = name.rfind(prefix, 0) == 0;
    if (match != invert) out.emplace(name, p);
  }
  return out;
}

}  // namespace sfs::optim
