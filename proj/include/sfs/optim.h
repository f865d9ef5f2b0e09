// sfs/optim.h -- AdamW with decoupled weight decay, plus gradient clipping.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "sfs/nn.h"

namespace sfs::optim {

class AdamW {
 public:
  AdamW() = default;
  AdamW(std::map<std::string, ad::Var> params, double lr, double beta1,
        double beta2, double weight_decay = 0.0, double eps = 1e-8);

  // Applies one update using the gradients currently on the parameters.
  // Parameters without a gradient this step are skipped.
  void step();
  void zero_grad();
  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }

  // Scales gradients so their global L2 norm is at most max_norm;
  // returns the pre-clip norm.
  double clip_grad_norm(double max_norm);

  const std::map<std::string, ad::Var>& params() const { return params_; }

  // Optimizer state round trip for checkpoint resume.
  void serialize(std::ostream& out) const;
  void deserialize(std::istream& in);

 private:
  struct Moment {
    Tensor m, v;
  };
  std::map<std::string, ad::Var> params_;
  std::map<std::string, Moment> state_;
  double lr_ = 1e-3, beta1_ = 0.9, beta2_ = 0.999, wd_ = 0.0, eps_ = 1e-8;
  int64_t t_ = 0;
};

// Select parameters by name prefix (empty prefix selects all).
std::map<std::string, ad::Var> select_params(const nn::ParamStore& store,
                                             const std::string& prefix,
                                             bool invert = false);

}  // namespace sfs::optim
