#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rotmap/losses.hpp"
#include "rotmap/mappings.hpp"
#include "rotmap/mat.hpp"
#include "rotmap/rng.hpp"

// A small dense feed-forward network with manual backpropagation, enough to
// put a learned feature extractor in front of any rotation mapping and train
// the composition end to end. Everything is 64-bit: the gradient checks run
// at tolerances 32-bit arithmetic cannot meet, and speed is a non-issue at
// this scale.

namespace rotmap::net {

enum class Activation { Tanh, Relu, Identity };

const char* activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

// One affine layer y = act(W x + b); W is row-major out×in.
struct Layer {
    int in = 0;
    int out = 0;
    Activation activation = Activation::Identity;
    std::vector<double> w;
    std::vector<double> b;
};

// Parameter-shaped gradient accumulators, one (dw, db) pair per layer.
struct Gradients {
    std::vector<std::vector<double>> dw;
    std::vector<std::vector<double>> db;
    void scale(double s);
};

// Per-layer inputs and pre-activations retained by a forward pass so the
// backward pass can be exact.
struct ForwardCache {
    std::vector<std::vector<double>> inputs;  // inputs[l] feeds layer l
    std::vector<std::vector<double>> pre;     // pre[l] = W·inputs[l] + b
};

class DenseNet {
public:
    // sizes = {input, hidden..., output}; hidden layers get `hidden`, the
    // final layer `output`. Weights start at zero; call init_glorot.
    DenseNet(const std::vector<int>& sizes, Activation hidden, Activation output);

    // Uniform ±sqrt(6/(fan_in+fan_out)) weights, zero biases.
    void init_glorot(Pcg32& rng);

    int input_dim() const { return layers_.front().in; }
    int output_dim() const { return layers_.back().out; }
    const std::vector<Layer>& layers() const { return layers_; }
    Layer& layer(std::size_t i) { return layers_[i]; }

    std::vector<double> forward(const std::vector<double>& x) const;
    std::vector<double> forward(const std::vector<double>& x, ForwardCache& cache) const;

    // Reverse-mode pass for one sample; accumulates parameter gradients into
    // `grads` (shaped by zero_gradients) and returns dL/dinput.
    std::vector<double> backward(const ForwardCache& cache, const std::vector<double>& grad_out,
                                 Gradients& grads) const;

    Gradients zero_gradients() const;
    std::size_t parameter_count() const;
    bool parameters_finite() const;

    // Flat parameter vector, layer by layer, weights then bias. Used by the
    // finite-difference harness and the checkpoint format.
    std::vector<double> flatten_parameters() const;
    void set_parameters(const std::vector<double>& theta);

private:
    std::vector<Layer> layers_;
};

enum class OptimizerKind { Sgd, Adam };

struct OptimConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Optimizer state paired with one DenseNet; moment buffers mirror the
// parameter shapes. apply() throws NonFiniteParameters the moment any
// updated parameter stops being finite.
class OptimState {
public:
    OptimState(const DenseNet& net, OptimConfig cfg);

    void apply(DenseNet& net, const Gradients& grads);

    std::int64_t step() const { return step_; }
    const OptimConfig& config() const { return cfg_; }

private:
    void update_buffer(std::vector<double>& p, const std::vector<double>& g,
                       std::vector<double>& m, std::vector<double>& v);

    OptimConfig cfg_;
    std::int64_t step_ = 0;
    std::vector<std::vector<double>> mw_, vw_, mb_, vb_;
};

struct TrainBatch {
    std::vector<std::vector<double>> inputs;
    std::vector<Mat3> targets;
};

struct StepResult {
    double loss = 0.0;  // mean over the samples that contributed
    int used = 0;
    int skipped = 0;  // degenerate mapping inputs, dropped from the update
};

// One optimizer step of L(θ) = mean over the batch of
// loss(mapping(net(input)), target), chained as dL/dθ = dL/dvec(R)·J·dx/dθ.
// Samples whose net output is degenerate for the mapping are skipped and
// counted; if every sample is skipped, no update happens.
StepResult train_step(DenseNet& net, OptimState& optim, const TrainBatch& batch,
                      const map::MappingSpec& mapping, const loss::LossSpec& loss_spec);

// Checkpoint layout (all integers and floats 64-bit little-endian):
//   u64 layer_count, then per layer u64 in, u64 out, u64 activation_code,
//   then per layer the weight matrix row-major followed by the bias vector.
// A human-readable sidecar `<path>.txt` lists the layer sizes.
void save_checkpoint(const DenseNet& net, const std::string& path);
DenseNet load_checkpoint(const std::string& path);

}  // namespace rotmap::net
