#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rcfm/matrix.hpp"

namespace rcfm {

/// Layer widths [input, hidden..., output]; logistic sigmoid on every
/// non-input layer. At least one hidden layer.
struct MlnArchitecture {
    std::vector<int> layer_sizes;

    int input_size() const { return layer_sizes.front(); }
    int output_size() const { return layer_sizes.back(); }
    void validate() const;
};

struct MlnModel {
    MlnArchitecture arch;
    std::vector<Matrix> weights;               // layer l: size_l x size_{l-1}
    std::vector<std::vector<double>> biases;   // layer l: size_l

    void validate() const;
};

/// Gradients of the mean squared-error loss, same shapes as the model.
struct MlnGradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
};

struct TrainResult {
    MlnModel model;
    std::vector<double> history;   // epochs + 1 entries, initial loss first
};

/// Weights uniform in [-r, r] with r = sqrt(6 / (fan_in + fan_out)), biases
/// zero; identical seeds give identical models.
MlnModel init_model(const MlnArchitecture& arch, std::uint64_t seed);

/// Batch forward pass: rows of x map independently to rows of the output.
Matrix forward(const MlnModel& model, const Matrix& x);

/// 0.5 * sum (d - y)^2 for one sample.
double loss(std::span<const double> target, std::span<const double> output);

/// Mean of the per-row loss over a batch.
double batch_loss(const MlnModel& model, const Matrix& x, const Matrix& targets);

/// Exact gradients of batch_loss by reverse accumulation.
MlnGradients backprop_gradients(const MlnModel& model, const Matrix& x, const Matrix& targets);

/// Full-batch gradient descent, one update per epoch. Aborts with a
/// diagnostic when the loss stops being finite.
TrainResult train_gd(const MlnModel& model, const Matrix& x, const Matrix& targets, double lr,
                     int epochs);

/// Flat text format: a header line with the layer sizes, then per layer the
/// weight matrix rows followed by the bias vector.
void write_model(std::ostream& out, const MlnModel& model);
MlnModel read_model(std::istream& in);
void save_model(const MlnModel& model, const std::string& path);
MlnModel load_model(const std::string& path);

}  // namespace rcfm
