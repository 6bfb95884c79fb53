#include "effnet/optim.hpp"

#include <cmath>

#include "effnet/error.hpp"

namespace effnet {

Adam::Adam(const std::vector<Tensor>& params, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const Tensor& p : params) {
        m_.push_back(Tensor::zeros(p.shape));
        v_.push_back(Tensor::zeros(p.shape));
    }
}

void Adam::step(std::vector<Tensor>& params, const std::vector<Tensor>& grads) {
    if (params.size() != m_.size() || grads.size() != m_.size()) {
        throw Error("adam_step: parameter/gradient count mismatch");
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& p = params[i];
        const Tensor& g = grads[i];
        Tensor& m = m_[i];
        Tensor& v = v_[i];
        for (std::size_t k = 0; k < p.data.size(); ++k) {
            m.data[k] = beta1_ * m.data[k] + (1.0 - beta1_) * g.data[k];
            v.data[k] = beta2_ * v.data[k] + (1.0 - beta2_) * g.data[k] * g.data[k];
            const double m_hat = m.data[k] / bc1;
            const double v_hat = v.data[k] / bc2;
            p.data[k] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

} // namespace effnet
