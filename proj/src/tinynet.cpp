#include "rotmap/tinynet.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

#include "rotmap/errors.hpp"
#include "rotmap/kernels.hpp"

namespace rotmap::net {

namespace {

double activate(Activation a, double z) {
    switch (a) {
        case Activation::Tanh: return std::tanh(z);
        case Activation::Relu: return z > 0.0 ? z : 0.0;
        case Activation::Identity: return z;
    }
    return z;
}

// Derivative in terms of the pre-activation z.
double activate_grad(Activation a, double z) {
    switch (a) {
        case Activation::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        case Activation::Identity: return 1.0;
    }
    return 1.0;
}

bool finite_range(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

void write_u64_le(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffu);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64_le(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64_le(std::ostream& os, double d) { write_u64_le(os, std::bit_cast<std::uint64_t>(d)); }

double read_f64_le(std::istream& is) { return std::bit_cast<double>(read_u64_le(is)); }

}  // namespace

const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Identity: return "identity";
    }
    return "?";
}

std::optional<Activation> parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "identity") return Activation::Identity;
    return std::nullopt;
}

void Gradients::scale(double s) {
    for (auto& g : dw)
        for (double& x : g) x *= s;
    for (auto& g : db)
        for (double& x : g) x *= s;
}

DenseNet::DenseNet(const std::vector<int>& sizes, Activation hidden, Activation output) {
    if (sizes.size() < 2) throw ShapeMismatch("net: need at least an input and an output size");
    for (int s : sizes)
        if (s <= 0) throw ShapeMismatch("net: layer sizes must be positive");
    layers_.resize(sizes.size() - 1);
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Layer& lay = layers_[l];
        lay.in = sizes[l];
        lay.out = sizes[l + 1];
        lay.activation = (l + 1 == layers_.size()) ? output : hidden;
        lay.w.assign(static_cast<std::size_t>(lay.in) * static_cast<std::size_t>(lay.out), 0.0);
        lay.b.assign(static_cast<std::size_t>(lay.out), 0.0);
    }
}

void DenseNet::init_glorot(Pcg32& rng) {
    for (Layer& lay : layers_) {
        const double limit = std::sqrt(6.0 / static_cast<double>(lay.in + lay.out));
        for (double& w : lay.w) w = rng.uniform(-limit, limit);
        for (double& b : lay.b) b = 0.0;
    }
}

std::vector<double> DenseNet::forward(const std::vector<double>& x) const {
    ForwardCache cache;
    return forward(x, cache);
}

std::vector<double> DenseNet::forward(const std::vector<double>& x, ForwardCache& cache) const {
    if (static_cast<int>(x.size()) != input_dim())
        throw ShapeMismatch("net: input size does not match the first layer");
    cache.inputs.assign(layers_.size(), {});
    cache.pre.assign(layers_.size(), {});
    std::vector<double> a = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const Layer& lay = layers_[l];
        cache.inputs[l] = a;
        std::vector<double> z(static_cast<std::size_t>(lay.out));
        kernels::matvec(lay.w.data(), a.data(), z.data(), static_cast<std::size_t>(lay.out),
                        static_cast<std::size_t>(lay.in));
        kernels::axpy(1.0, lay.b.data(), z.data(), static_cast<std::size_t>(lay.out));
        cache.pre[l] = z;
        a.resize(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) a[i] = activate(lay.activation, z[i]);
    }
    return a;
}

std::vector<double> DenseNet::backward(const ForwardCache& cache,
                                       const std::vector<double>& grad_out,
                                       Gradients& grads) const {
    if (cache.inputs.size() != layers_.size() || cache.pre.size() != layers_.size())
        throw ShapeMismatch("net: cache does not match this net");
    if (static_cast<int>(grad_out.size()) != output_dim())
        throw ShapeMismatch("net: output gradient size does not match the last layer");
    std::vector<double> dz = grad_out;
    for (std::size_t li = layers_.size(); li-- > 0;) {
        const Layer& lay = layers_[li];
        const std::vector<double>& z = cache.pre[li];
        for (std::size_t i = 0; i < dz.size(); ++i) dz[i] *= activate_grad(lay.activation, z[i]);
        kernels::ger_acc(grads.dw[li].data(), dz.data(), cache.inputs[li].data(),
                         static_cast<std::size_t>(lay.out), static_cast<std::size_t>(lay.in), 1.0);
        kernels::axpy(1.0, dz.data(), grads.db[li].data(), static_cast<std::size_t>(lay.out));
        std::vector<double> dx(static_cast<std::size_t>(lay.in));
        kernels::matvec_t(lay.w.data(), dz.data(), dx.data(), static_cast<std::size_t>(lay.out),
                          static_cast<std::size_t>(lay.in));
        dz = std::move(dx);
    }
    return dz;
}

Gradients DenseNet::zero_gradients() const {
    Gradients g;
    g.dw.reserve(layers_.size());
    g.db.reserve(layers_.size());
    for (const Layer& lay : layers_) {
        g.dw.emplace_back(lay.w.size(), 0.0);
        g.db.emplace_back(lay.b.size(), 0.0);
    }
    return g;
}

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const Layer& lay : layers_) n += lay.w.size() + lay.b.size();
    return n;
}

bool DenseNet::parameters_finite() const {
    for (const Layer& lay : layers_)
        if (!finite_range(lay.w) || !finite_range(lay.b)) return false;
    return true;
}

std::vector<double> DenseNet::flatten_parameters() const {
    std::vector<double> theta;
    theta.reserve(parameter_count());
    for (const Layer& lay : layers_) {
        theta.insert(theta.end(), lay.w.begin(), lay.w.end());
        theta.insert(theta.end(), lay.b.begin(), lay.b.end());
    }
    return theta;
}

void DenseNet::set_parameters(const std::vector<double>& theta) {
    if (theta.size() != parameter_count())
        throw ShapeMismatch("net: parameter vector size does not match");
    std::size_t at = 0;
    for (Layer& lay : layers_) {
        std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(at), lay.w.size(), lay.w.begin());
        at += lay.w.size();
        std::copy_n(theta.begin() + static_cast<std::ptrdiff_t>(at), lay.b.size(), lay.b.begin());
        at += lay.b.size();
    }
}

OptimState::OptimState(const DenseNet& net, OptimConfig cfg) : cfg_(cfg) {
    if (!(cfg.lr >= 0.0) || !std::isfinite(cfg.lr))
        throw OutOfRange("optimizer: learning rate must be non-negative and finite");
    for (const Layer& lay : net.layers()) {
        mw_.emplace_back(lay.w.size(), 0.0);
        vw_.emplace_back(lay.w.size(), 0.0);
        mb_.emplace_back(lay.b.size(), 0.0);
        vb_.emplace_back(lay.b.size(), 0.0);
    }
}

void OptimState::update_buffer(std::vector<double>& p, const std::vector<double>& g,
                               std::vector<double>& m, std::vector<double>& v) {
    if (p.size() != g.size()) throw ShapeMismatch("optimizer: gradient shape mismatch");
    if (cfg_.kind == OptimizerKind::Sgd) {
        kernels::axpy(-cfg_.lr, g.data(), p.data(), p.size());
        return;
    }
    const double t = static_cast<double>(step_);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, t);
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
}

void OptimState::apply(DenseNet& net, const Gradients& grads) {
    if (grads.dw.size() != mw_.size() || grads.db.size() != mb_.size())
        throw ShapeMismatch("optimizer: gradient layer count mismatch");
    ++step_;
    for (std::size_t l = 0; l < mw_.size(); ++l) {
        update_buffer(net.layer(l).w, grads.dw[l], mw_[l], vw_[l]);
        update_buffer(net.layer(l).b, grads.db[l], mb_[l], vb_[l]);
    }
    if (!net.parameters_finite())
        throw NonFiniteParameters("optimizer: parameters left the finite range");
}

StepResult train_step(DenseNet& net, OptimState& optim, const TrainBatch& batch,
                      const map::MappingSpec& mapping, const loss::LossSpec& loss_spec) {
    if (batch.inputs.size() != batch.targets.size())
        throw ShapeMismatch("train: inputs and targets differ in count");
    if (batch.inputs.empty()) throw ShapeMismatch("train: empty batch");
    if (net.output_dim() != mapping.input_dim())
        throw ShapeMismatch("train: net output does not feed this mapping");

    Gradients grads = net.zero_gradients();
    StepResult result;
    double total = 0.0;
    for (std::size_t s = 0; s < batch.inputs.size(); ++s) {
        ForwardCache cache;
        const std::vector<double> x = net.forward(batch.inputs[s], cache);
        map::MappingEval ev;
        try {
            ev = map::jacobian(mapping, x);
        } catch (const DegenerateInput&) {
            ++result.skipped;
            continue;
        } catch (const NearSingularDerivative&) {
            ++result.skipped;
            continue;
        }
        const loss::RotationLoss rl = loss::rotation_loss(loss_spec, ev.value, batch.targets[s]);
        const VecN<double, 9> g9 = vec9(rl.grad);
        const std::vector<double> gvec(g9.a.begin(), g9.a.end());
        const std::vector<double> dout = matvec_transposed(ev.jacobian, gvec);
        net.backward(cache, dout, grads);
        total += rl.value;
        ++result.used;
    }
    if (result.used > 0) {
        grads.scale(1.0 / static_cast<double>(result.used));
        optim.apply(net, grads);
        result.loss = total / static_cast<double>(result.used);
    }
    return result;
}

void save_checkpoint(const DenseNet& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("checkpoint: cannot open " + path + " for writing");
    write_u64_le(os, net.layers().size());
    for (const Layer& lay : net.layers()) {
        write_u64_le(os, static_cast<std::uint64_t>(lay.in));
        write_u64_le(os, static_cast<std::uint64_t>(lay.out));
        write_u64_le(os, static_cast<std::uint64_t>(lay.activation));
    }
    for (const Layer& lay : net.layers()) {
        for (double w : lay.w) write_f64_le(os, w);
        for (double b : lay.b) write_f64_le(os, b);
    }
    if (!os) throw Error("checkpoint: write to " + path + " failed");

    std::ofstream sidecar(path + ".txt");
    if (!sidecar) throw Error("checkpoint: cannot open " + path + ".txt for writing");
    sidecar << net.input_dim();
    for (const Layer& lay : net.layers()) sidecar << " " << lay.out;
    sidecar << "\n";
    for (const Layer& lay : net.layers()) sidecar << activation_name(lay.activation) << "\n";
}

DenseNet load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("checkpoint: cannot open " + path);
    const std::uint64_t count = read_u64_le(is);
    if (!is || count == 0 || count > 1024) throw Error("checkpoint: corrupt layer count");
    std::vector<int> sizes;
    std::vector<std::uint64_t> acts;
    for (std::uint64_t l = 0; l < count; ++l) {
        const std::uint64_t in = read_u64_le(is);
        const std::uint64_t out = read_u64_le(is);
        const std::uint64_t act = read_u64_le(is);
        if (!is || in == 0 || out == 0 || act > 2) throw Error("checkpoint: corrupt shape header");
        if (l == 0)
            sizes.push_back(static_cast<int>(in));
        else if (static_cast<int>(in) != sizes.back())
            throw Error("checkpoint: layer shapes do not chain");
        sizes.push_back(static_cast<int>(out));
        acts.push_back(act);
    }
    DenseNet net(sizes, Activation::Tanh, Activation::Identity);
    for (std::uint64_t l = 0; l < count; ++l) {
        Layer& lay = net.layer(l);
        lay.activation = static_cast<Activation>(acts[l]);
        for (double& w : lay.w) w = read_f64_le(is);
        for (double& b : lay.b) b = read_f64_le(is);
    }
    if (!is) throw Error("checkpoint: truncated parameter block");
    return net;
}

}  // namespace rotmap::net
