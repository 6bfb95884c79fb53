#ifndef EFFNET_OPTIM_HPP
#define EFFNET_OPTIM_HPP

#include <cstdint>
#include <vector>

#include "effnet/tensor.hpp"

namespace effnet {

// Adam with bias correction:
//   m <- b1*m + (1-b1)*g;  v <- b2*v + (1-b2)*g^2
//   p <- p - lr * (m / (1-b1^t)) / (sqrt(v / (1-b2^t)) + eps)
class Adam {
  public:
    Adam(const std::vector<Tensor>& params, double lr, double beta1, double beta2 = 0.999,
         double eps = 1e-8);

    void step(std::vector<Tensor>& params, const std::vector<Tensor>& grads);

    std::int64_t t() const { return t_; }
    double lr() const { return lr_; }

  private:
    double lr_, beta1_, beta2_, eps_;
    std::int64_t t_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

} // namespace effnet

#endif // EFFNET_OPTIM_HPP
