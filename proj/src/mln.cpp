#include "rcfm/mln.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rcfm/random.hpp"

namespace rcfm {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void check_input(const MlnModel& model, const Matrix& x) {
    model.validate();
    if (x.cols() != static_cast<std::size_t>(model.arch.input_size()))
        throw std::invalid_argument("mln: input width does not match the input layer");
    if (!x.all_finite()) throw std::invalid_argument("mln: non-finite input");
}

/// Activations per layer, input first.
std::vector<Matrix> forward_trace(const MlnModel& model, const Matrix& x) {
    std::vector<Matrix> acts;
    acts.reserve(model.weights.size() + 1);
    acts.push_back(x);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Matrix& w = model.weights[l];
        const std::vector<double>& bias = model.biases[l];
        const Matrix& prev = acts.back();
        Matrix next(prev.rows(), w.rows());
        for (std::size_t r = 0; r < prev.rows(); ++r) {
            for (std::size_t i = 0; i < w.rows(); ++i) {
                double z = bias[i];
                for (std::size_t j = 0; j < w.cols(); ++j) z += w(i, j) * prev(r, j);
                next(r, i) = sigmoid(z);
            }
        }
        acts.push_back(std::move(next));
    }
    return acts;
}

}  // namespace

void MlnArchitecture::validate() const {
    if (layer_sizes.size() < 3)
        throw std::invalid_argument("mln: need input, at least one hidden, and output layer");
    for (int s : layer_sizes)
        if (s < 1) throw std::invalid_argument("mln: zero-size layer");
}

void MlnModel::validate() const {
    arch.validate();
    const std::size_t layers = arch.layer_sizes.size() - 1;
    if (weights.size() != layers || biases.size() != layers)
        throw std::invalid_argument("mln: layer count mismatch");
    for (std::size_t l = 0; l < layers; ++l) {
        const auto rows = static_cast<std::size_t>(arch.layer_sizes[l + 1]);
        const auto cols = static_cast<std::size_t>(arch.layer_sizes[l]);
        if (weights[l].rows() != rows || weights[l].cols() != cols || biases[l].size() != rows)
            throw std::invalid_argument("mln: weight shape mismatch at layer " + std::to_string(l));
        if (!weights[l].all_finite()) throw std::invalid_argument("mln: non-finite weight");
        for (double b : biases[l])
            if (!std::isfinite(b)) throw std::invalid_argument("mln: non-finite bias");
    }
}

MlnModel init_model(const MlnArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    Rng rng(seed);
    MlnModel model;
    model.arch = arch;
    for (std::size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        const auto fan_in = static_cast<std::size_t>(arch.layer_sizes[l]);
        const auto fan_out = static_cast<std::size_t>(arch.layer_sizes[l + 1]);
        const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Matrix w(fan_out, fan_in);
        for (double& v : w.data()) v = rng.uniform(-r, r);
        model.weights.push_back(std::move(w));
        model.biases.emplace_back(fan_out, 0.0);
    }
    return model;
}

Matrix forward(const MlnModel& model, const Matrix& x) {
    check_input(model, x);
    return forward_trace(model, x).back();
}

double loss(std::span<const double> target, std::span<const double> output) {
    if (target.size() != output.size()) throw std::invalid_argument("loss: length mismatch");
    double e = 0.0;
    for (std::size_t h = 0; h < target.size(); ++h) {
        const double d = target[h] - output[h];
        e += d * d;
    }
    return 0.5 * e;
}

double batch_loss(const MlnModel& model, const Matrix& x, const Matrix& targets) {
    if (targets.rows() != x.rows()) throw std::invalid_argument("loss: batch size mismatch");
    const Matrix y = forward(model, x);
    if (targets.cols() != y.cols()) throw std::invalid_argument("loss: target width mismatch");
    double total = 0.0;
    for (std::size_t r = 0; r < y.rows(); ++r) total += loss(targets.row(r), y.row(r));
    return total / static_cast<double>(y.rows());
}

MlnGradients backprop_gradients(const MlnModel& model, const Matrix& x, const Matrix& targets) {
    check_input(model, x);
    if (targets.rows() != x.rows() ||
        targets.cols() != static_cast<std::size_t>(model.arch.output_size()))
        throw std::invalid_argument("mln: target shape mismatch");

    const std::vector<Matrix> acts = forward_trace(model, x);
    const std::size_t layers = model.weights.size();
    const std::size_t n = x.rows();

    MlnGradients grads;
    grads.weights.reserve(layers);
    grads.biases.reserve(layers);
    for (std::size_t l = 0; l < layers; ++l) {
        grads.weights.emplace_back(model.weights[l].rows(), model.weights[l].cols(), 0.0);
        grads.biases.emplace_back(model.biases[l].size(), 0.0);
    }

    // delta = dLoss/dz for the current layer; start at the output
    const Matrix& y = acts.back();
    Matrix delta(n, y.cols());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < y.cols(); ++i) {
            const double out = y(r, i);
            delta(r, i) = (out - targets(r, i)) * out * (1.0 - out) / static_cast<double>(n);
        }

    for (std::size_t l = layers; l-- > 0;) {
        const Matrix& prev = acts[l];
        Matrix& gw = grads.weights[l];
        std::vector<double>& gb = grads.biases[l];
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t i = 0; i < gw.rows(); ++i) {
                const double d = delta(r, i);
                gb[i] += d;
                for (std::size_t j = 0; j < gw.cols(); ++j) gw(i, j) += d * prev(r, j);
            }
        if (l == 0) break;
        const Matrix& w = model.weights[l];
        Matrix prev_delta(n, w.cols());
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t j = 0; j < w.cols(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < w.rows(); ++i) s += delta(r, i) * w(i, j);
                const double a = prev(r, j);
                prev_delta(r, j) = s * a * (1.0 - a);
            }
        delta = std::move(prev_delta);
    }
    return grads;
}

TrainResult train_gd(const MlnModel& model, const Matrix& x, const Matrix& targets, double lr,
                     int epochs) {
    if (lr < 0.0) throw std::invalid_argument("train_gd: negative learning rate");
    if (epochs < 0) throw std::invalid_argument("train_gd: negative epoch count");

    TrainResult result;
    result.model = model;
    result.history.reserve(static_cast<std::size_t>(epochs) + 1);
    result.history.push_back(batch_loss(result.model, x, targets));
    for (int e = 0; e < epochs; ++e) {
        const MlnGradients g = backprop_gradients(result.model, x, targets);
        for (std::size_t l = 0; l < result.model.weights.size(); ++l) {
            auto& w = result.model.weights[l].data();
            const auto& gw = g.weights[l].data();
            for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * gw[i];
            auto& b = result.model.biases[l];
            const auto& gb = g.biases[l];
            for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * gb[i];
        }
        const double l = batch_loss(result.model, x, targets);
        if (!std::isfinite(l))
            throw std::runtime_error("train_gd: loss diverged at epoch " + std::to_string(e + 1) +
                                     " (learning rate " + std::to_string(lr) + " too large?)");
        result.history.push_back(l);
    }
    return result;
}

void write_model(std::ostream& out, const MlnModel& model) {
    model.validate();
    out << "mln";
    for (int s : model.arch.layer_sizes) out << ' ' << s;
    out << '\n';
    char buf[64];
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        const Matrix& w = model.weights[l];
        for (std::size_t i = 0; i < w.rows(); ++i) {
            for (std::size_t j = 0; j < w.cols(); ++j) {
                std::snprintf(buf, sizeof(buf), "%.17g", w(i, j));
                out << (j ? " " : "") << buf;
            }
            out << '\n';
        }
        for (std::size_t i = 0; i < model.biases[l].size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", model.biases[l][i]);
            out << (i ? " " : "") << buf;
        }
        out << '\n';
    }
}

MlnModel read_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("model: empty stream");
    std::istringstream header(line);
    std::string tag;
    header >> tag;
    if (tag != "mln") throw std::runtime_error("model: bad header");
    MlnModel model;
    int s = 0;
    while (header >> s) model.arch.layer_sizes.push_back(s);
    model.arch.validate();
    for (std::size_t l = 0; l + 1 < model.arch.layer_sizes.size(); ++l) {
        const auto rows = static_cast<std::size_t>(model.arch.layer_sizes[l + 1]);
        const auto cols = static_cast<std::size_t>(model.arch.layer_sizes[l]);
        Matrix w(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                if (!(in >> w(i, j))) throw std::runtime_error("model: truncated weights");
        std::vector<double> b(rows);
        for (std::size_t i = 0; i < rows; ++i)
            if (!(in >> b[i])) throw std::runtime_error("model: truncated biases");
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    model.validate();
    return model;
}

void save_model(const MlnModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("model: cannot write '" + path + "'");
    write_model(out, model);
}

MlnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model: cannot open '" + path + "'");
    return read_model(in);
}

}  // namespace rcfm
