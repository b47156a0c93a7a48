#include "acoca/neural.hpp"

#include <algorithm>
#include <cmath>
#include "json.hpp"
#include <numeric>

namespace acoca {

const char* to_string(Activation a) {
  switch (a) {
    case Activation::Linear: return "linear";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Softmax: return "softmax";
  }
  return "linear";
}

Activation activation_from_string(const std::string& s) {
  if (s == "linear") return Activation::Linear;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "softmax") return Activation::Softmax;
  throw std::invalid_argument("unknown activation: " + s);
}

double glorot_limit(int fan_in, int fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); }

namespace {

void check_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) throw ShapeMismatch("network needs at least input and output layers");
  for (int s : sizes)
    if (s <= 0) throw ShapeMismatch("layer sizes must be positive");
}

Mat apply(Activation a, const Mat& Z) {
  switch (a) {
    case Activation::Linear: return Z;
    case Activation::Relu: return Z.cwiseMax(0.0);
    case Activation::Tanh: return Z.array().tanh().matrix();
    case Activation::Softmax: {
      Mat out(Z.rows(), Z.cols());
      for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        const Vec e = (Z.col(j).array() - Z.col(j).maxCoeff()).exp().matrix();
        out.col(j) = e / e.sum();
      }
      return out;
    }
  }
  return Z;
}

// Maps dL/dA to dL/dZ for A = f(Z).
Mat pull_back(Activation a, const Mat& Z, const Mat& A, const Mat& dA) {
  switch (a) {
    case Activation::Linear: return dA;
    case Activation::Relu: return (Z.array() > 0.0).cast<double>().matrix().cwiseProduct(dA);
    case Activation::Tanh: return ((1.0 - A.array().square()) * dA.array()).matrix();
    case Activation::Softmax: {
      Mat dZ(Z.rows(), Z.cols());
      for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        const double dot = A.col(j).dot(dA.col(j));
        dZ.col(j) = (A.col(j).array() * (dA.col(j).array() - dot)).matrix();
      }
      return dZ;
    }
  }
  return dA;
}

}  // namespace

Network::Network(std::vector<int> sizes, Activation output, std::mt19937_64& rng)
    : sizes_(std::move(sizes)), output_(output) {
  check_sizes(sizes_);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    std::uniform_real_distribution<double> u(-glorot_limit(in, out), glorot_limit(in, out));
    Mat w(out, in);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
    W_.push_back(std::move(w));
    b_.push_back(Vec::Zero(out));
  }
}

Network Network::zeros(std::vector<int> sizes, Activation output) {
  check_sizes(sizes);
  Network n;
  n.sizes_ = std::move(sizes);
  n.output_ = output;
  for (std::size_t l = 0; l + 1 < n.sizes_.size(); ++l) {
    n.W_.push_back(Mat::Zero(n.sizes_[l + 1], n.sizes_[l]));
    n.b_.push_back(Vec::Zero(n.sizes_[l + 1]));
  }
  return n;
}

Vec Network::forward(const Vec& x) const {
  if (x.size() != input_size()) throw ShapeMismatch("input length does not match network");
  return forward_batch(x).col(0);
}

Mat Network::forward_batch(const Mat& X) const {
  if (X.rows() != input_size()) throw ShapeMismatch("input rows do not match network");
  Mat A = X;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    Mat Z = (W_[l] * A).colwise() + b_[l];
    A = apply(l + 1 == W_.size() ? output_ : Activation::Relu, Z);
  }
  return A;
}

Gradients Network::backward(const Mat& X, const Mat& dOut, Mat* dInput, bool preactivation) const {
  if (X.rows() != input_size() || dOut.rows() != output_size() || dOut.cols() != X.cols())
    throw ShapeMismatch("backward shapes do not match network");
  const std::size_t L = W_.size();
  std::vector<Mat> Zs(L), As(L + 1);
  As[0] = X;
  for (std::size_t l = 0; l < L; ++l) {
    Zs[l] = (W_[l] * As[l]).colwise() + b_[l];
    As[l + 1] = apply(l + 1 == L ? output_ : Activation::Relu, Zs[l]);
  }
  Gradients g;
  g.dW.resize(L);
  g.db.resize(L);
  Mat dZ = preactivation ? dOut : pull_back(output_, Zs[L - 1], As[L], dOut);
  for (std::size_t l = L; l-- > 0;) {
    g.dW[l] = dZ * As[l].transpose();
    g.db[l] = dZ.rowwise().sum();
    Mat dA = W_[l].transpose() * dZ;
    if (l == 0) {
      if (dInput) *dInput = std::move(dA);
    } else {
      dZ = pull_back(Activation::Relu, Zs[l - 1], As[l], dA);
    }
  }
  return g;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < W_.size(); ++l) n += W_[l].size() + b_[l].size();
  return n;
}

std::vector<double> Network::flat_parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (std::size_t l = 0; l < W_.size(); ++l) {
    p.insert(p.end(), W_[l].data(), W_[l].data() + W_[l].size());
    p.insert(p.end(), b_[l].data(), b_[l].data() + b_[l].size());
  }
  return p;
}

void Network::set_flat_parameters(const std::vector<double>& p) {
  if (p.size() != parameter_count()) throw ShapeMismatch("parameter vector length mismatch");
  std::size_t k = 0;
  for (std::size_t l = 0; l < W_.size(); ++l) {
    std::copy_n(p.begin() + k, W_[l].size(), W_[l].data());
    k += W_[l].size();
    std::copy_n(p.begin() + k, b_[l].size(), b_[l].data());
    k += b_[l].size();
  }
}

std::vector<double> Network::flatten(const Gradients& g) {
  std::vector<double> p;
  for (std::size_t l = 0; l < g.dW.size(); ++l) {
    p.insert(p.end(), g.dW[l].data(), g.dW[l].data() + g.dW[l].size());
    p.insert(p.end(), g.db[l].data(), g.db[l].data() + g.db[l].size());
  }
  return p;
}

bool Network::operator==(const Network& o) const {
  if (sizes_ != o.sizes_ || output_ != o.output_) return false;
  for (std::size_t l = 0; l < W_.size(); ++l)
    if (W_[l] != o.W_[l] || b_[l] != o.b_[l]) return false;
  return true;
}

std::string Network::to_json() const {
  nlohmann::json j;
  j["layer_sizes"] = sizes_;
  j["output_activation"] = to_string(output_);
  j["parameters"] = flat_parameters();
  return j.dump();
}

Network Network::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Network n = zeros(j.at("layer_sizes").get<std::vector<int>>(),
                    activation_from_string(j.at("output_activation").get<std::string>()));
  n.set_flat_parameters(j.at("parameters").get<std::vector<double>>());
  return n;
}

Adam::Adam(const Network& net, double lr, double b1, double b2, double eps)
    : lr_(lr), b1_(b1), b2_(b2), eps_(eps) {
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    mW_.push_back(Mat::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    vW_.push_back(mW_.back());
    mb_.push_back(Vec::Zero(net.biases()[l].size()));
    vb_.push_back(mb_.back());
  }
}

bool Adam::step(Network& net, const Gradients& g) {
  if (g.dW.size() != mW_.size()) throw ShapeMismatch("gradient layer count mismatch");
  for (std::size_t l = 0; l < g.dW.size(); ++l)
    if (!g.dW[l].allFinite() || !g.db[l].allFinite()) {
      ++skipped_;
      return false;
    }
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  auto update = [&](auto& param, auto& m, auto& v, const auto& grad) {
    m = b1_ * m + (1.0 - b1_) * grad;
    v = b2_ * v + (1.0 - b2_) * grad.cwiseProduct(grad);
    param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + eps_);
  };
  for (std::size_t l = 0; l < g.dW.size(); ++l) {
    update(net.weights()[l], mW_[l], vW_[l], g.dW[l]);
    update(net.biases()[l], mb_[l], vb_[l], g.db[l]);
  }
  return true;
}

double mse(const Mat& prediction, const Mat& target) {
  return (prediction - target).squaredNorm() / static_cast<double>(prediction.size());
}

double train_step(Network& net, Adam& opt, const Mat& X, const Mat& Y) {
  if (X.cols() == 0) throw std::invalid_argument("train_step needs a non-empty batch");
  const Mat P = net.forward_batch(X);
  if (P.rows() != Y.rows() || P.cols() != Y.cols()) throw ShapeMismatch("target shape mismatch");
  const double loss = mse(P, Y);
  const Mat dOut = (2.0 / static_cast<double>(P.size())) * (P - Y);
  opt.step(net, net.backward(X, dOut));
  return loss;
}

void soft_update(Network& target, const Network& online, double tau) {
  if (!target.same_shape(online)) throw ShapeMismatch("soft_update shape mismatch");
  for (std::size_t l = 0; l < target.layer_count(); ++l) {
    target.weights()[l] = tau * online.weights()[l] + (1.0 - tau) * target.weights()[l];
    target.biases()[l] = tau * online.biases()[l] + (1.0 - tau) * target.biases()[l];
  }
}

void ReplayBuffer::push(Transition t) {
  items_.push_back(std::move(t));
  while (items_.size() > capacity_) items_.pop_front();
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t k, std::mt19937_64& rng) const {
  if (k == 0 || items_.size() < k) return {};
  std::vector<std::size_t> idx(items_.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, idx.size() - 1);
    std::swap(idx[i], idx[d(rng)]);
  }
  idx.resize(k);
  return idx;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t k, std::mt19937_64& rng) const {
  std::vector<Transition> out;
  for (auto i : sample_indices(k, rng)) out.push_back(items_[i]);
  return out;
}

}  // namespace acoca
