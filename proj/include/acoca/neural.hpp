#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace acoca {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Activation { Linear, Relu, Tanh, Softmax };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct ShapeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct Gradients {
  std::vector<Mat> dW;
  std::vector<Vec> db;
};

// Fully connected net; hidden layers use ReLU, the last layer `output`.
// Batched calls take one sample per column.
class Network {
public:
  Network() = default;
  Network(std::vector<int> layer_sizes, Activation output, std::mt19937_64& rng);
  // All weights and biases zero.
  static Network zeros(std::vector<int> layer_sizes, Activation output);

  const std::vector<int>& layer_sizes() const { return sizes_; }
  Activation output_activation() const { return output_; }
  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  std::size_t layer_count() const { return W_.size(); }

  Vec forward(const Vec& x) const;
  Mat forward_batch(const Mat& X) const;

  // Gradients of sum_j <dOut_j, f(X_j)>. When `preactivation` is set, dOut is
  // taken with respect to the output layer's pre-activation instead.
  Gradients backward(const Mat& X, const Mat& dOut, Mat* dInput = nullptr,
                     bool preactivation = false) const;

  std::size_t parameter_count() const;
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(const std::vector<double>& p);
  static std::vector<double> flatten(const Gradients& g);

  std::vector<Mat>& weights() { return W_; }
  std::vector<Vec>& biases() { return b_; }
  const std::vector<Mat>& weights() const { return W_; }
  const std::vector<Vec>& biases() const { return b_; }

  bool same_shape(const Network& o) const { return sizes_ == o.sizes_; }
  bool operator==(const Network& o) const;

  std::string to_json() const;
  static Network from_json(const std::string& text);

private:
  std::vector<int> sizes_;
  Activation output_ = Activation::Linear;
  std::vector<Mat> W_;
  std::vector<Vec> b_;
};

double glorot_limit(int fan_in, int fan_out);

class Adam {
public:
  Adam() = default;
  Adam(const Network& net, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  // Rejects non-finite gradients without touching the parameters.
  bool step(Network& net, const Gradients& g);

  double learning_rate() const { return lr_; }
  std::uint64_t step_count() const { return t_; }
  std::uint64_t skipped_steps() const { return skipped_; }

private:
  double lr_ = 1e-3, b1_ = 0.9, b2_ = 0.999, eps_ = 1e-8;
  std::uint64_t t_ = 0;
  std::uint64_t skipped_ = 0;
  std::vector<Mat> mW_, vW_;
  std::vector<Vec> mb_, vb_;
};

// Mean squared error over every element of the batch; returns the loss before
// the update.
double train_step(Network& net, Adam& opt, const Mat& X, const Mat& Y);
double mse(const Mat& prediction, const Mat& target);

void soft_update(Network& target, const Network& online, double tau);

struct Transition {
  Vec state;
  double action = 0;
  double reward = 0;
  Vec next_state;
  bool terminal = false;
};

class ReplayBuffer {
public:
  explicit ReplayBuffer(std::size_t capacity = 100) : capacity_(capacity) {}
  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  const Transition& operator[](std::size_t i) const { return items_[i]; }
  // Uniform without replacement; empty when fewer than k transitions are held.
  std::vector<std::size_t> sample_indices(std::size_t k, std::mt19937_64& rng) const;
  std::vector<Transition> sample(std::size_t k, std::mt19937_64& rng) const;

private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

}  // namespace acoca
