#include "srsgroup/neural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "srsgroup/io.hpp"
#include "srsgroup/rng.hpp"

namespace srsgroup {

namespace {

void he_uniform(std::vector<double>& w, int fan_in, std::mt19937_64& rng)
{
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> uni(-limit, limit);
    for (double& v : w)
        v = uni(rng);
}

#if defined(__GNUC__)
typedef double vec8d __attribute__((vector_size(64)));

inline vec8d load8(const double* p)
{
    return vec8d{p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]};
}

inline void store8(double* p, vec8d v)
{
    for (int q = 0; q < 8; ++q)
        p[q] = v[q];
}
#endif

// C (m x n, row stride ldc) += A * B. A is addressed as
// a[i*a_rs + p*a_cs], so the same kernel serves A and A^T operands; B
// (k x n, row stride ldb) must be row-contiguous. The 4x8 register tile
// keeps the accumulators live across the k sweep, and k and n are tiled
// so the active 512 KB B panel stays cache-resident across row blocks.
// Per output element the sum always runs over p ascending, so results do
// not depend on the tile sizes.
void gemm_acc(int m, int n, int k, const double* a, std::ptrdiff_t a_rs, std::ptrdiff_t a_cs,
              const double* bm, std::ptrdiff_t ldb, double* c, std::ptrdiff_t ldc)
{
    constexpr int MR = 4, NR = 8, KT = 256, NT = 256;
    for (int k0 = 0; k0 < k; k0 += KT) {
        const int k1 = std::min(k, k0 + KT);
        for (int j0 = 0; j0 < n; j0 += NT) {
            const int jn = std::min(n, j0 + NT);
            int i = 0;
            for (; i + MR <= m; i += MR) {
                const double* arow[MR];
                double* crow[MR];
                for (int r = 0; r < MR; ++r) {
                    arow[r] = a + (i + r) * a_rs;
                    crow[r] = c + (i + r) * ldc;
                }
                int j = j0;
                for (; j + NR <= jn; j += NR) {
#if defined(__GNUC__)
                    vec8d acc[MR];
                    for (int r = 0; r < MR; ++r)
                        acc[r] = load8(crow[r] + j);
                    for (int p = k0; p < k1; ++p) {
                        const vec8d bv = load8(bm + p * ldb + j);
                        for (int r = 0; r < MR; ++r) {
                            const double s = arow[r][p * a_cs];
                            acc[r] += vec8d{s, s, s, s, s, s, s, s} * bv;
                        }
                    }
                    for (int r = 0; r < MR; ++r)
                        for (int q = 0; q < NR; ++q)
                            crow[r][j + q] = acc[r][q];
#else
                    double acc[MR][NR];
                    for (int r = 0; r < MR; ++r)
                        for (int q = 0; q < NR; ++q)
                            acc[r][q] = crow[r][j + q];
                    for (int p = k0; p < k1; ++p) {
                        const double* brow = bm + p * ldb + j;
                        double av[MR];
                        for (int r = 0; r < MR; ++r)
                            av[r] = arow[r][p * a_cs];
                        for (int r = 0; r < MR; ++r)
                            for (int q = 0; q < NR; ++q)
                                acc[r][q] += av[r] * brow[q];
                    }
                    for (int r = 0; r < MR; ++r)
                        for (int q = 0; q < NR; ++q)
                            crow[r][j + q] = acc[r][q];
#endif
                }
                for (; j < jn; ++j) {
                    double acc[MR];
                    for (int r = 0; r < MR; ++r)
                        acc[r] = crow[r][j];
                    for (int p = k0; p < k1; ++p) {
                        const double bv = bm[p * ldb + j];
                        for (int r = 0; r < MR; ++r)
                            acc[r] += arow[r][p * a_cs] * bv;
                    }
                    for (int r = 0; r < MR; ++r)
                        crow[r][j] = acc[r];
                }
            }
            for (; i < m; ++i) {
                const double* ar = a + i * a_rs;
                double* cr = c + i * ldc;
                for (int p = k0; p < k1; ++p) {
                    const double av = ar[p * a_cs];
                    const double* brow = bm + p * ldb;
                    for (int j2 = j0; j2 < jn; ++j2)
                        cr[j2] += av * brow[j2];
                }
            }
        }
    }
}

} // namespace

DenseLayer::DenseLayer(int inputs, int outputs) : in_(inputs), out_(outputs)
{
    if (inputs <= 0 || outputs <= 0)
        throw std::invalid_argument("dense: inputs and outputs must be positive");
    w_.resize(static_cast<std::size_t>(in_) * out_);
    b_.resize(out_);
    w_t_.assign(static_cast<std::size_t>(in_) * out_, 0.0);
}

void DenseLayer::init(std::mt19937_64& rng)
{
    he_uniform(w_.value, in_, rng);
    std::fill(b_.value.begin(), b_.value.end(), 0.0);
    refresh();
}

void DenseLayer::refresh()
{
    // blocked transpose keeps both sides inside cache lines
    constexpr int BT = 32;
    for (int i0 = 0; i0 < in_; i0 += BT) {
        const int i1 = std::min(in_, i0 + BT);
        for (int o0 = 0; o0 < out_; o0 += BT) {
            const int o1 = std::min(out_, o0 + BT);
            for (int i = i0; i < i1; ++i)
                for (int o = o0; o < o1; ++o)
                    w_t_[static_cast<std::size_t>(o) * in_ + i] =
                        w_.value[static_cast<std::size_t>(i) * out_ + o];
        }
    }
}

std::unique_ptr<Layer> DenseLayer::clone() const
{
    return std::make_unique<DenseLayer>(*this);
}

void DenseLayer::forward(const Matrix& x, Matrix& y)
{
    x_ = x;
    const double* bias = b_.value.data();
    for (int b = 0; b < x.rows; ++b)
        std::copy(bias, bias + out_, y.row(b));
    gemm_acc(x.rows, out_, in_, x.data.data(), in_, 1, w_.value.data(), out_, y.data.data(),
             out_);
}

void DenseLayer::backward(const Matrix& dy, Matrix& dx)
{
    const int bn = dy.rows;
    double* gb = b_.grad.data();
    for (int b = 0; b < bn; ++b) {
        const double* dr = dy.row(b);
        for (int o = 0; o < out_; ++o)
            gb[o] += dr[o];
    }

    // dW += x^T * dy: x is walked column-wise through the stride pair
    gemm_acc(in_, out_, bn, x_.data.data(), 1, in_, dy.data.data(), out_, w_.grad.data(), out_);

    std::fill(dx.data.begin(), dx.data.end(), 0.0);
    gemm_acc(bn, in_, out_, dy.data.data(), out_, 1, w_t_.data(), in_, dx.data.data(), in_);
}

Conv1DLayer::Conv1DLayer(int in_channels, int out_channels, int kernel, int length)
    : in_ch_(in_channels), out_ch_(out_channels), kernel_(kernel), length_(length)
{
    if (in_channels <= 0 || out_channels <= 0 || length <= 0)
        throw std::invalid_argument("conv1d: channels and length must be positive");
    if (kernel <= 0 || kernel % 2 == 0)
        throw std::invalid_argument("conv1d: kernel must be odd for same padding");
    w_.resize(static_cast<std::size_t>(out_ch_) * in_ch_ * kernel_);
    b_.resize(out_ch_);
}

void Conv1DLayer::init(std::mt19937_64& rng)
{
    he_uniform(w_.value, in_ch_ * kernel_, rng);
    std::fill(b_.value.begin(), b_.value.end(), 0.0);
}

std::unique_ptr<Layer> Conv1DLayer::clone() const
{
    return std::make_unique<Conv1DLayer>(*this);
}

void Conv1DLayer::forward(const Matrix& x, Matrix& y)
{
    x_ = x;
    const int half = kernel_ / 2;
    for (int b = 0; b < x.rows; ++b) {
        const double* xr = x.row(b);
        double* yr = y.row(b);
        for (int oc = 0; oc < out_ch_; ++oc)
            std::fill(yr + static_cast<std::size_t>(oc) * length_,
                      yr + static_cast<std::size_t>(oc + 1) * length_, b_.value[oc]);
        for (int oc = 0; oc < out_ch_; ++oc) {
            double* yo = yr + static_cast<std::size_t>(oc) * length_;
            for (int ic = 0; ic < in_ch_; ++ic) {
                const double* xi = xr + static_cast<std::size_t>(ic) * length_;
                const double* wk =
                    w_.value.data() + (static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_;
                for (int k = 0; k < kernel_; ++k) {
                    const int shift = k - half;
                    const double wv = wk[k];
                    const int p0 = std::max(0, -shift);
                    const int p1 = std::min(length_, length_ - shift);
                    for (int p = p0; p < p1; ++p)
                        yo[p] += wv * xi[p + shift];
                }
            }
        }
    }
}

void Conv1DLayer::backward(const Matrix& dy, Matrix& dx)
{
    const int half = kernel_ / 2;
    std::fill(dx.data.begin(), dx.data.end(), 0.0);
    double* gw = w_.grad.data();
    double* gb = b_.grad.data();
    for (int b = 0; b < dy.rows; ++b) {
        const double* dr = dy.row(b);
        const double* xr = x_.row(b);
        double* dxr = dx.row(b);
        for (int oc = 0; oc < out_ch_; ++oc) {
            const double* doo = dr + static_cast<std::size_t>(oc) * length_;
            for (int p = 0; p < length_; ++p)
                gb[oc] += doo[p];
            for (int ic = 0; ic < in_ch_; ++ic) {
                const double* xi = xr + static_cast<std::size_t>(ic) * length_;
                double* dxi = dxr + static_cast<std::size_t>(ic) * length_;
                const std::size_t wbase = (static_cast<std::size_t>(oc) * in_ch_ + ic) * kernel_;
                for (int k = 0; k < kernel_; ++k) {
                    const int shift = k - half;
                    const int p0 = std::max(0, -shift);
                    const int p1 = std::min(length_, length_ - shift);
                    const double wv = w_.value[wbase + k];
#if defined(__GNUC__)
                    vec8d accv = {};
                    int p = p0;
                    for (; p + 8 <= p1; p += 8) {
                        const vec8d dv = load8(doo + p);
                        accv += load8(xi + p + shift) * dv;
                        const vec8d wv8 = {wv, wv, wv, wv, wv, wv, wv, wv};
                        store8(dxi + p + shift, load8(dxi + p + shift) + wv8 * dv);
                    }
                    double acc = 0.0;
                    for (int q = 0; q < 8; ++q)
                        acc += accv[q];
                    for (; p < p1; ++p) {
                        acc += xi[p + shift] * doo[p];
                        dxi[p + shift] += wv * doo[p];
                    }
#else
                    double acc = 0.0;
                    for (int p = p0; p < p1; ++p) {
                        acc += xi[p + shift] * doo[p];
                        dxi[p + shift] += wv * doo[p];
                    }
#endif
                    gw[wbase + k] += acc;
                }
            }
        }
    }
}

void ReluLayer::forward(const Matrix& x, Matrix& y)
{
    rows_ = x.rows;
    cols_ = x.cols;
    mask_.resize(x.data.size());
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const bool on = x.data[i] > 0.0;
        mask_[i] = on;
        y.data[i] = on ? x.data[i] : 0.0;
    }
}

void ReluLayer::backward(const Matrix& dy, Matrix& dx)
{
    for (std::size_t i = 0; i < dy.data.size(); ++i)
        dx.data[i] = mask_[i] ? dy.data[i] : 0.0;
}

std::unique_ptr<Layer> ReluLayer::clone() const
{
    return std::make_unique<ReluLayer>(*this);
}

void FlattenLayer::forward(const Matrix& x, Matrix& y)
{
    y = x;
}

void FlattenLayer::backward(const Matrix& dy, Matrix& dx)
{
    dx = dy;
}

std::unique_ptr<Layer> FlattenLayer::clone() const
{
    return std::make_unique<FlattenLayer>(*this);
}

void Model::add(std::unique_ptr<Layer> layer)
{
    layers_.push_back(std::move(layer));
}

void Model::initialize(std::uint64_t seed)
{
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        auto rng = make_rng(seed, rng_stream::weight_init, i);
        layers_[i]->init(rng);
    }
}

const Matrix& Model::forward(const Matrix& x)
{
    if (layers_.empty())
        throw std::logic_error("model: no layers");
    input_ = x;
    acts_.resize(layers_.size());
    const Matrix* cur = &input_;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Layer& layer = *layers_[i];
        const int expect = layer.expected_inputs();
        if (expect >= 0 && cur->cols != expect)
            throw std::invalid_argument("model: layer " + std::to_string(i) + " (" + layer.kind() +
                                        ") expected " + std::to_string(expect) +
                                        " input columns, got " + std::to_string(cur->cols));
        const int out_cols = layer.outputs_for(cur->cols);
        Matrix& out = acts_[i];
        if (out.rows != cur->rows || out.cols != out_cols)
            out = Matrix(cur->rows, out_cols);
        layer.forward(*cur, out);
        cur = &out;
    }
    return acts_.back();
}

void Model::backward(const Matrix& dout)
{
    if (acts_.empty())
        throw std::logic_error("model: backward before forward");
    if (dout.rows != acts_.back().rows || dout.cols != acts_.back().cols)
        throw std::invalid_argument("model: output gradient shape mismatch");

    Matrix grad = dout;
    Matrix prev;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        const Matrix& in = i == 0 ? input_ : acts_[i - 1];
        if (prev.rows != in.rows || prev.cols != in.cols)
            prev = Matrix(in.rows, in.cols);
        layers_[i]->backward(grad, prev);
        std::swap(grad, prev);
    }
}

void Model::zero_grad()
{
    for (auto& layer : layers_)
        for (Tensor* t : layer->tensors())
            t->zero_grad();
}

void Model::refresh()
{
    for (auto& layer : layers_)
        layer->refresh();
}

std::vector<Tensor*> Model::tensors()
{
    std::vector<Tensor*> all;
    for (auto& layer : layers_)
        for (Tensor* t : layer->tensors())
            all.push_back(t);
    return all;
}

std::size_t Model::parameter_count()
{
    std::size_t n = 0;
    for (Tensor* t : tensors())
        n += t->value.size();
    return n;
}

Model Model::clone() const
{
    Model copy;
    for (const auto& layer : layers_)
        copy.layers_.push_back(layer->clone());
    return copy;
}

double mse_loss(const Matrix& pred, const Matrix& target)
{
    if (pred.rows != target.rows || pred.cols != target.cols)
        throw std::invalid_argument("mse: shape mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double d = pred.data[i] - target.data[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.data.size());
}

Matrix mse_gradient(const Matrix& pred, const Matrix& target)
{
    if (pred.rows != target.rows || pred.cols != target.cols)
        throw std::invalid_argument("mse: shape mismatch");
    Matrix g(pred.rows, pred.cols);
    const double scale = 2.0 / static_cast<double>(pred.data.size());
    for (std::size_t i = 0; i < pred.data.size(); ++i)
        g.data[i] = scale * (pred.data[i] - target.data[i]);
    return g;
}

AdamOptimizer::AdamOptimizer(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps)
{
}

bool AdamOptimizer::step(Model& model)
{
    std::vector<Tensor*> tensors = model.tensors();
    if (m_.empty()) {
        m_.resize(tensors.size());
        v_.resize(tensors.size());
        for (std::size_t i = 0; i < tensors.size(); ++i) {
            m_[i].assign(tensors[i]->value.size(), 0.0);
            v_[i].assign(tensors[i]->value.size(), 0.0);
        }
    }
    if (m_.size() != tensors.size())
        throw std::logic_error("adam: model changed between steps");

    for (Tensor* t : tensors)
        for (double g : t->grad)
            if (!std::isfinite(g)) {
                ++skipped_;
                return false;
            }

    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < tensors.size(); ++i) {
        Tensor& t = *tensors[i];
        std::vector<double>& m = m_[i];
        std::vector<double>& v = v_[i];
        for (std::size_t k = 0; k < t.value.size(); ++k) {
            const double g = t.grad[k];
            m[k] = beta1_ * m[k] + (1.0 - beta1_) * g;
            v[k] = beta2_ * v[k] + (1.0 - beta2_) * g * g;
            t.value[k] -= lr_ * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + eps_);
        }
    }
    model.refresh();
    return true;
}

std::vector<double> train_mse(Model& model, const Matrix& x, const Matrix& y,
                              const TrainOptions& opt,
                              const std::function<void(int, double)>& on_epoch)
{
    if (x.rows != y.rows)
        throw std::invalid_argument("train: sample count mismatch between inputs and targets");
    if (x.rows == 0)
        throw std::invalid_argument("train: empty training set");
    if (opt.batch_size <= 0 || opt.epochs <= 0)
        throw std::invalid_argument("train: epochs and batch_size must be positive");

    AdamOptimizer adam(opt.learning_rate);
    std::vector<int> order(x.rows);
    std::iota(order.begin(), order.end(), 0);

    std::vector<double> losses;
    losses.reserve(opt.epochs);
    Matrix bx, by;
    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        auto rng = make_rng(opt.seed, rng_stream::shuffle, static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);

        double epoch_loss = 0.0;
        for (int start = 0; start < x.rows; start += opt.batch_size) {
            const int bn = std::min(opt.batch_size, x.rows - start);
            if (bx.rows != bn) {
                bx = Matrix(bn, x.cols);
                by = Matrix(bn, y.cols);
            }
            for (int b = 0; b < bn; ++b) {
                const int src = order[start + b];
                std::copy(x.row(src), x.row(src) + x.cols, bx.row(b));
                std::copy(y.row(src), y.row(src) + y.cols, by.row(b));
            }
            const Matrix& pred = model.forward(bx);
            epoch_loss += mse_loss(pred, by) * bn;
            model.zero_grad();
            model.backward(mse_gradient(pred, by));
            adam.step(model);
        }
        epoch_loss /= x.rows;
        losses.push_back(epoch_loss);
        if (on_epoch)
            on_epoch(epoch, epoch_loss);
    }
    return losses;
}

void save_model(const std::string& path_prefix, Model& model)
{
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t i = 0; i < model.layer_count(); ++i) {
        Layer& layer = model.layer(i);
        nlohmann::json j{{"kind", layer.kind()}};
        if (auto* d = dynamic_cast<DenseLayer*>(&layer)) {
            j["inputs"] = d->inputs();
            j["outputs"] = d->outputs();
        } else if (auto* c = dynamic_cast<Conv1DLayer*>(&layer)) {
            j["in_channels"] = c->in_channels();
            j["out_channels"] = c->out_channels();
            j["kernel"] = c->kernel();
            j["length"] = c->length();
        }
        layers.push_back(std::move(j));
    }
    nlohmann::json doc{{"format", "srsgroup-model-1"},
                       {"dtype", "float64"},
                       {"byte_order", "little-endian"},
                       {"layers", std::move(layers)}};
    write_file(path_prefix + ".json", doc.dump(2) + "\n");

    std::ofstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin)
        throw std::runtime_error("cannot open for writing: " + path_prefix + ".bin");
    for (Tensor* t : model.tensors())
        bin.write(reinterpret_cast<const char*>(t->value.data()),
                  static_cast<std::streamsize>(t->value.size() * sizeof(double)));
}

Model load_model(const std::string& path_prefix)
{
    const nlohmann::json doc = nlohmann::json::parse(read_file(path_prefix + ".json"));
    if (doc.at("format").get<std::string>() != "srsgroup-model-1")
        throw std::runtime_error("load_model: unknown format in " + path_prefix + ".json");

    Model model;
    for (const auto& j : doc.at("layers")) {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "dense")
            model.add(std::make_unique<DenseLayer>(j.at("inputs").get<int>(),
                                                   j.at("outputs").get<int>()));
        else if (kind == "conv1d")
            model.add(std::make_unique<Conv1DLayer>(
                j.at("in_channels").get<int>(), j.at("out_channels").get<int>(),
                j.at("kernel").get<int>(), j.at("length").get<int>()));
        else if (kind == "relu")
            model.add(std::make_unique<ReluLayer>());
        else if (kind == "flatten")
            model.add(std::make_unique<FlattenLayer>());
        else
            throw std::runtime_error("load_model: unknown layer kind " + kind);
    }

    std::ifstream bin(path_prefix + ".bin", std::ios::binary);
    if (!bin)
        throw std::runtime_error("cannot open for reading: " + path_prefix + ".bin");
    for (Tensor* t : model.tensors()) {
        bin.read(reinterpret_cast<char*>(t->value.data()),
                 static_cast<std::streamsize>(t->value.size() * sizeof(double)));
        if (!bin)
            throw std::runtime_error("load_model: truncated weight payload");
    }
    model.refresh();
    return model;
}

} // namespace srsgroup
