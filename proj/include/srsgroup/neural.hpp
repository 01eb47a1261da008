#ifndef SRSGROUP_NEURAL_HPP
#define SRSGROUP_NEURAL_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace srsgroup {

// Batch of row vectors: rows index samples, cols index features. For the
// convolution layers a row holds the channels back to back, channel c in
// [c*length, (c+1)*length).
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
};

// One learnable tensor and its gradient accumulator.
struct Tensor {
    std::vector<double> value;
    std::vector<double> grad;

    void resize(std::size_t n)
    {
        value.assign(n, 0.0);
        grad.assign(n, 0.0);
    }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

class Layer {
  public:
    virtual ~Layer() = default;
    virtual std::string kind() const = 0;
    // expected input width, or -1 when the layer takes any width
    virtual int expected_inputs() const { return -1; }
    virtual int outputs_for(int inputs) const { return inputs; }
    virtual void forward(const Matrix& x, Matrix& y) = 0;
    // consumes the gradient wrt the forward output, accumulates parameter
    // gradients, emits the gradient wrt the forward input
    virtual void backward(const Matrix& dy, Matrix& dx) = 0;
    virtual void init(std::mt19937_64&) {}
    // rebuilds derived caches after a parameter update
    virtual void refresh() {}
    virtual std::vector<Tensor*> tensors() { return {}; }
    virtual std::unique_ptr<Layer> clone() const = 0;
};

class DenseLayer : public Layer {
  public:
    DenseLayer(int inputs, int outputs);
    std::string kind() const override { return "dense"; }
    int expected_inputs() const override { return in_; }
    int outputs_for(int) const override { return out_; }
    void forward(const Matrix& x, Matrix& y) override;
    void backward(const Matrix& dy, Matrix& dx) override;
    void init(std::mt19937_64& rng) override;
    void refresh() override;
    std::vector<Tensor*> tensors() override { return {&w_, &b_}; }
    std::unique_ptr<Layer> clone() const override;

    int inputs() const { return in_; }
    int outputs() const { return out_; }
    Tensor& weights() { return w_; }
    Tensor& bias() { return b_; }

  private:
    int in_;
    int out_;
    Tensor w_;                 // [input][output]
    Tensor b_;                 // [output]
    std::vector<double> w_t_;  // transposed copy [output][input], see refresh()
    Matrix x_;
};

// Same-padded 1-D convolution over a fixed spatial length.
class Conv1DLayer : public Layer {
  public:
    Conv1DLayer(int in_channels, int out_channels, int kernel, int length);
    std::string kind() const override { return "conv1d"; }
    int expected_inputs() const override { return in_ch_ * length_; }
    int outputs_for(int) const override { return out_ch_ * length_; }
    void forward(const Matrix& x, Matrix& y) override;
    void backward(const Matrix& dy, Matrix& dx) override;
    void init(std::mt19937_64& rng) override;
    std::vector<Tensor*> tensors() override { return {&w_, &b_}; }
    std::unique_ptr<Layer> clone() const override;

    int in_channels() const { return in_ch_; }
    int out_channels() const { return out_ch_; }
    int kernel() const { return kernel_; }
    int length() const { return length_; }
    Tensor& weights() { return w_; }
    Tensor& bias() { return b_; }

  private:
    int in_ch_;
    int out_ch_;
    int kernel_;
    int length_;
    Tensor w_; // [out_channel][in_channel][tap]
    Tensor b_; // [out_channel]
    Matrix x_;
};

class ReluLayer : public Layer {
  public:
    std::string kind() const override { return "relu"; }
    void forward(const Matrix& x, Matrix& y) override;
    void backward(const Matrix& dy, Matrix& dx) override;
    std::unique_ptr<Layer> clone() const override;

  private:
    std::vector<char> mask_;
    int rows_ = 0;
    int cols_ = 0;
};

// Marks the transition from the channel view to the flat feature view.
// Numerically the identity since rows are already flat.
class FlattenLayer : public Layer {
  public:
    std::string kind() const override { return "flatten"; }
    void forward(const Matrix& x, Matrix& y) override;
    void backward(const Matrix& dy, Matrix& dx) override;
    std::unique_ptr<Layer> clone() const override;
};

class Model {
  public:
    Model() = default;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    void add(std::unique_ptr<Layer> layer);
    void initialize(std::uint64_t seed);
    const Matrix& forward(const Matrix& x);
    void backward(const Matrix& dout);
    void zero_grad();
    void refresh();
    std::vector<Tensor*> tensors();
    std::size_t parameter_count();
    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }
    Model clone() const;

  private:
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<Matrix> acts_; // one output per layer
    Matrix input_;
};

double mse_loss(const Matrix& pred, const Matrix& target);
Matrix mse_gradient(const Matrix& pred, const Matrix& target);

// Adam with bias correction. step() refuses non-finite gradients and
// leaves the parameters untouched in that case.
class AdamOptimizer {
  public:
    explicit AdamOptimizer(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8);
    bool step(Model& model);
    int steps_taken() const { return t_; }
    int steps_skipped() const { return skipped_; }

  private:
    double lr_, beta1_, beta2_, eps_;
    int t_ = 0;
    int skipped_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

struct TrainOptions {
    int epochs = 200;
    int batch_size = 64;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
};

// Minibatch MSE training with a seeded per-epoch shuffle. Returns the mean
// training loss of every epoch; on_epoch, when set, observes them as they
// complete.
std::vector<double> train_mse(Model& model, const Matrix& x, const Matrix& y,
                              const TrainOptions& opt,
                              const std::function<void(int, double)>& on_epoch = {});

void save_model(const std::string& path_prefix, Model& model);
Model load_model(const std::string& path_prefix);

} // namespace srsgroup

#endif
