#include "gridmarl/nn.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gridmarl::nn {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& z, Activation act) {
    switch (act) {
        case Activation::Linear: return z;
        case Activation::ReLU: return z.cwiseMax(0.0);
        case Activation::Tanh: return z.array().tanh().matrix();
    }
    throw std::logic_error("unknown activation");
}

// Derivative given pre-activation z and activated value a.
Eigen::MatrixXd activate_grad(const Eigen::MatrixXd& z, const Eigen::MatrixXd& a, Activation act) {
    switch (act) {
        case Activation::Linear: return Eigen::MatrixXd::Ones(z.rows(), z.cols());
        case Activation::ReLU:
            return (z.array() > 0.0).cast<double>().matrix();
        case Activation::Tanh: return (1.0 - a.array().square()).matrix();
    }
    throw std::logic_error("unknown activation");
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
    return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

}  // namespace

std::size_t Tensor::count() const {
    std::size_t n = 1;
    for (std::size_t s : shape) n *= s;
    return shape.empty() ? 0 : n;
}

void Tensor::validate() const {
    if (shape.empty() || shape.size() > 2)
        throw std::invalid_argument("Tensor: shape must be 1-D or 2-D");
    if (count() != values.size())
        throw std::invalid_argument("Tensor: value count does not match shape");
    for (double v : values)
        if (!std::isfinite(v)) throw std::invalid_argument("Tensor: non-finite value");
}

Tensor Tensor::from(const Eigen::MatrixXd& m) {
    Tensor t;
    t.shape = {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())};
    t.values.resize(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            t.values[static_cast<std::size_t>(r * m.cols() + c)] = m(r, c);
    return t;
}

Tensor Tensor::from(const Eigen::VectorXd& v) {
    Tensor t;
    t.shape = {static_cast<std::size_t>(v.size())};
    t.values.assign(v.data(), v.data() + v.size());
    return t;
}

Eigen::MatrixXd Tensor::matrix() const {
    validate();
    if (shape.size() != 2) throw std::invalid_argument("Tensor: expected 2-D shape");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(shape[0]), static_cast<Eigen::Index>(shape[1]));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            m(r, c) = values[static_cast<std::size_t>(r * m.cols() + c)];
    return m;
}

Eigen::VectorXd Tensor::vector() const {
    validate();
    if (shape.size() != 1) throw std::invalid_argument("Tensor: expected 1-D shape");
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(shape[0]));
}

void NetSpec::validate() const {
    if (input_dim < 1) throw std::invalid_argument("NetSpec: input_dim must be >= 1");
    if (lstm_hidden < 0) throw std::invalid_argument("NetSpec: lstm_hidden must be >= 0");
    if (output_dim < 1) throw std::invalid_argument("NetSpec: output_dim must be >= 1");
    for (int wdt : dense_hidden)
        if (wdt < 1) throw std::invalid_argument("NetSpec: dense widths must be >= 1");
}

std::size_t NetSpec::param_count() const {
    validate();
    std::size_t n = 0;
    int feat = input_dim;
    if (lstm_hidden > 0) {
        n += static_cast<std::size_t>(4 * lstm_hidden) *
             static_cast<std::size_t>(input_dim + lstm_hidden + 1);
        feat = lstm_hidden;
    }
    for (int wdt : dense_hidden) {
        n += static_cast<std::size_t>(wdt) * static_cast<std::size_t>(feat + 1);
        feat = wdt;
    }
    n += static_cast<std::size_t>(output_dim) * static_cast<std::size_t>(feat + 1);
    return n;
}

NetParams NetParams::zeros(const NetSpec& spec) {
    spec.validate();
    NetParams p;
    p.spec = spec;
    const int h = spec.lstm_hidden;
    p.wx = Eigen::MatrixXd::Zero(4 * h, spec.input_dim);
    p.wh = Eigen::MatrixXd::Zero(4 * h, h);
    p.bl = Eigen::VectorXd::Zero(4 * h);
    int feat = h > 0 ? h : spec.input_dim;
    for (int wdt : spec.dense_hidden) {
        p.w.push_back(Eigen::MatrixXd::Zero(wdt, feat));
        p.b.push_back(Eigen::VectorXd::Zero(wdt));
        feat = wdt;
    }
    p.w.push_back(Eigen::MatrixXd::Zero(spec.output_dim, feat));
    p.b.push_back(Eigen::VectorXd::Zero(spec.output_dim));
    return p;
}

NetParams NetParams::init(const NetSpec& spec, std::uint64_t seed) {
    NetParams p = zeros(spec);
    std::mt19937_64 rng(seed);
    auto fill = [&rng](Eigen::MatrixXd& m, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = dist(rng);
    };
    if (spec.lstm_hidden > 0) {
        const int fan = spec.input_dim + spec.lstm_hidden;
        fill(p.wx, fan);
        fill(p.wh, fan);
    }
    int feat = spec.lstm_hidden > 0 ? spec.lstm_hidden : spec.input_dim;
    for (std::size_t l = 0; l < p.w.size(); ++l) {
        fill(p.w[l], feat);
        feat = static_cast<int>(p.w[l].rows());
    }
    return p;
}

std::vector<Tensor> NetParams::tensors() const {
    std::vector<Tensor> ts;
    ts.push_back(Tensor::from(wx));
    ts.push_back(Tensor::from(wh));
    ts.push_back(Tensor::from(bl));
    for (std::size_t l = 0; l < w.size(); ++l) {
        ts.push_back(Tensor::from(w[l]));
        ts.push_back(Tensor::from(b[l]));
    }
    return ts;
}

void NetParams::load_tensors(const std::vector<Tensor>& ts) {
    if (ts.size() != 3 + 2 * w.size())
        throw std::invalid_argument("NetParams: tensor count mismatch");
    auto expect = [](const Tensor& t, Eigen::Index rows, Eigen::Index cols) {
        if (t.shape.size() == 2) {
            if (static_cast<Eigen::Index>(t.shape[0]) != rows ||
                static_cast<Eigen::Index>(t.shape[1]) != cols)
                throw std::invalid_argument("NetParams: tensor shape mismatch");
        } else if (static_cast<Eigen::Index>(t.shape[0]) != rows || cols != 1) {
            throw std::invalid_argument("NetParams: tensor shape mismatch");
        }
    };
    expect(ts[0], wx.rows(), wx.cols());
    expect(ts[1], wh.rows(), wh.cols());
    expect(ts[2], bl.size(), 1);
    wx = ts[0].matrix();
    wh = ts[1].matrix();
    bl = ts[2].vector();
    for (std::size_t l = 0; l < w.size(); ++l) {
        expect(ts[3 + 2 * l], w[l].rows(), w[l].cols());
        expect(ts[4 + 2 * l], b[l].size(), 1);
        w[l] = ts[3 + 2 * l].matrix();
        b[l] = ts[4 + 2 * l].vector();
    }
}

GradBuffer GradBuffer::zeros(const NetSpec& spec) {
    const NetParams p = NetParams::zeros(spec);
    GradBuffer g;
    g.wx = p.wx;
    g.wh = p.wh;
    g.bl = p.bl;
    g.w = p.w;
    g.b = p.b;
    return g;
}

void GradBuffer::scale(double k) {
    wx *= k;
    wh *= k;
    bl *= k;
    for (auto& m : w) m *= k;
    for (auto& v : b) v *= k;
}

Eigen::MatrixXd forward(const NetParams& p, const std::vector<Eigen::MatrixXd>& seq,
                        ForwardCache* cache) {
    p.spec.validate();
    if (seq.empty()) throw std::invalid_argument("forward: sequence length must be >= 1");
    const int batch = static_cast<int>(seq.front().cols());
    for (const auto& x : seq)
        if (x.rows() != p.spec.input_dim || static_cast<int>(x.cols()) != batch)
            throw std::invalid_argument("forward: input shape mismatch");

    const int h = p.spec.lstm_hidden;
    const std::size_t t_len = seq.size();

    ForwardCache local;
    ForwardCache& cc = cache ? *cache : local;
    cc = ForwardCache{};
    cc.batch = batch;
    cc.x = seq;

    Eigen::MatrixXd head_in;
    if (h > 0) {
        cc.gi.resize(t_len);
        cc.gf.resize(t_len);
        cc.gg.resize(t_len);
        cc.go.resize(t_len);
        cc.c.resize(t_len);
        cc.tanh_c.resize(t_len);
        cc.h.resize(t_len);
        Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(h, batch);
        Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(h, batch);
        Eigen::MatrixXd z(4 * h, batch);
        for (std::size_t t = 0; t < t_len; ++t) {
            z.noalias() = p.wx * seq[t];
            z.noalias() += p.wh * h_prev;
            z.colwise() += p.bl;
            cc.gi[t] = sigmoid(z.topRows(h));
            cc.gf[t] = sigmoid(z.middleRows(h, h));
            cc.gg[t] = z.middleRows(2 * h, h).array().tanh().matrix();
            cc.go[t] = sigmoid(z.bottomRows(h));
            cc.c[t] = cc.gf[t].cwiseProduct(c_prev) + cc.gi[t].cwiseProduct(cc.gg[t]);
            cc.tanh_c[t] = cc.c[t].array().tanh().matrix();
            cc.h[t] = cc.go[t].cwiseProduct(cc.tanh_c[t]);
            h_prev = cc.h[t];
            c_prev = cc.c[t];
        }
        head_in = cc.h.back();
    } else {
        head_in = seq.back();
    }

    const std::size_t n_layers = p.w.size();
    cc.dense_in.resize(n_layers);
    cc.dense_pre.resize(n_layers);
    Eigen::MatrixXd a = head_in;
    for (std::size_t l = 0; l < n_layers; ++l) {
        cc.dense_in[l] = a;
        Eigen::MatrixXd z = p.w[l] * a;
        z.colwise() += p.b[l];
        cc.dense_pre[l] = z;
        const Activation act = (l + 1 == n_layers) ? p.spec.output_act : p.spec.hidden_act;
        a = activate(z, act);
    }
    cc.valid = true;
    return a;
}

BackwardResult backward(const NetParams& p, ForwardCache& cache, const Eigen::MatrixXd& upstream) {
    if (!cache.valid) throw std::logic_error("backward: stale or missing forward cache");
    cache.valid = false;

    const int h = p.spec.lstm_hidden;
    const int batch = cache.batch;
    const std::size_t t_len = cache.x.size();
    const std::size_t n_layers = p.w.size();
    if (upstream.rows() != p.spec.output_dim || static_cast<int>(upstream.cols()) != batch)
        throw std::invalid_argument("backward: upstream gradient shape mismatch");

    BackwardResult out;
    out.grads = GradBuffer::zeros(p.spec);

    // Dense stack, reverse order. After the loop `delta` holds the gradient
    // w.r.t. the head input (h_T, or the raw last timestep when no LSTM).
    Eigen::MatrixXd delta = upstream;
    for (std::size_t li = n_layers; li-- > 0;) {
        const Activation act = (li + 1 == n_layers) ? p.spec.output_act : p.spec.hidden_act;
        const Eigen::MatrixXd a = activate(cache.dense_pre[li], act);
        delta = delta.cwiseProduct(activate_grad(cache.dense_pre[li], a, act));
        out.grads.w[li].noalias() = delta * cache.dense_in[li].transpose();
        out.grads.b[li] = delta.rowwise().sum();
        delta = (p.w[li].transpose() * delta).eval();
    }

    out.input_grads.assign(t_len, Eigen::MatrixXd::Zero(p.spec.input_dim, batch));
    if (h == 0) {
        // No recurrence: only the last timestep fed the head.
        out.input_grads.back() = delta;
        return out;
    }

    // BPTT. Only h_T feeds the head; gradients enter earlier steps through
    // the recurrent connections.
    Eigen::MatrixXd dh = delta;
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(h, batch);
    Eigen::MatrixXd dz(4 * h, batch);
    for (std::size_t t = t_len; t-- > 0;) {
        const Eigen::MatrixXd& gi = cache.gi[t];
        const Eigen::MatrixXd& gf = cache.gf[t];
        const Eigen::MatrixXd& gg = cache.gg[t];
        const Eigen::MatrixXd& go = cache.go[t];
        const Eigen::MatrixXd& tc = cache.tanh_c[t];
        const Eigen::MatrixXd c_prev =
            t > 0 ? cache.c[t - 1] : Eigen::MatrixXd::Zero(h, batch).eval();
        const Eigen::MatrixXd h_prev =
            t > 0 ? cache.h[t - 1] : Eigen::MatrixXd::Zero(h, batch).eval();

        dc += dh.cwiseProduct(go).cwiseProduct((1.0 - tc.array().square()).matrix());
        const Eigen::MatrixXd d_go = dh.cwiseProduct(tc);
        const Eigen::MatrixXd d_gi = dc.cwiseProduct(gg);
        const Eigen::MatrixXd d_gf = dc.cwiseProduct(c_prev);
        const Eigen::MatrixXd d_gg = dc.cwiseProduct(gi);

        dz.topRows(h) = d_gi.cwiseProduct(gi).cwiseProduct((1.0 - gi.array()).matrix());
        dz.middleRows(h, h) = d_gf.cwiseProduct(gf).cwiseProduct((1.0 - gf.array()).matrix());
        dz.middleRows(2 * h, h) = d_gg.cwiseProduct((1.0 - gg.array().square()).matrix());
        dz.bottomRows(h) = d_go.cwiseProduct(go).cwiseProduct((1.0 - go.array()).matrix());

        out.grads.wx.noalias() += dz * cache.x[t].transpose();
        out.grads.wh.noalias() += dz * h_prev.transpose();
        out.grads.bl += dz.rowwise().sum();
        out.input_grads[t].noalias() = p.wx.transpose() * dz;

        dh.noalias() = p.wh.transpose() * dz;
        dc = dc.cwiseProduct(gf);
    }
    return out;
}

AdamState AdamState::zeros(const NetSpec& spec) {
    AdamState s;
    s.step = 0;
    s.m = GradBuffer::zeros(spec);
    s.v = GradBuffer::zeros(spec);
    return s;
}

namespace {

void adam_update(Eigen::Ref<Eigen::MatrixXd> p, const Eigen::MatrixXd& g, Eigen::MatrixXd& m,
                 Eigen::MatrixXd& v, double lr, double bc1, double bc2) {
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
    p -= (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + kAdamEps)).matrix();
}

void adam_update(Eigen::Ref<Eigen::VectorXd> p, const Eigen::VectorXd& g, Eigen::VectorXd& m,
                 Eigen::VectorXd& v, double lr, double bc1, double bc2) {
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * g;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
    p -= (lr * (m / bc1).array() / ((v / bc2).array().sqrt() + kAdamEps)).matrix();
}

}  // namespace

void adam_step(NetParams& p, const GradBuffer& g, AdamState& state, double lr) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    adam_update(p.wx, g.wx, state.m.wx, state.v.wx, lr, bc1, bc2);
    adam_update(p.wh, g.wh, state.m.wh, state.v.wh, lr, bc1, bc2);
    adam_update(p.bl, g.bl, state.m.bl, state.v.bl, lr, bc1, bc2);
    for (std::size_t l = 0; l < p.w.size(); ++l) {
        adam_update(p.w[l], g.w[l], state.m.w[l], state.v.w[l], lr, bc1, bc2);
        adam_update(p.b[l], g.b[l], state.m.b[l], state.v.b[l], lr, bc1, bc2);
    }
}

void sgd_step(NetParams& p, const GradBuffer& g, double lr) {
    p.wx -= lr * g.wx;
    p.wh -= lr * g.wh;
    p.bl -= lr * g.bl;
    for (std::size_t l = 0; l < p.w.size(); ++l) {
        p.w[l] -= lr * g.w[l];
        p.b[l] -= lr * g.b[l];
    }
}

OptimizerState OptimizerState::make(Optimizer kind, const NetSpec& spec) {
    OptimizerState s;
    s.kind = kind;
    if (kind == Optimizer::Adam) s.adam = AdamState::zeros(spec);
    return s;
}

void optimizer_step(NetParams& p, const GradBuffer& g, OptimizerState& state, double lr) {
    if (state.kind == Optimizer::Adam)
        adam_step(p, g, state.adam, lr);
    else
        sgd_step(p, g, lr);
}

void soft_update(NetParams& target, const NetParams& online, double tau) {
    if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("soft_update: tau in (0, 1]");
    target.wx = tau * online.wx + (1.0 - tau) * target.wx;
    target.wh = tau * online.wh + (1.0 - tau) * target.wh;
    target.bl = tau * online.bl + (1.0 - tau) * target.bl;
    for (std::size_t l = 0; l < target.w.size(); ++l) {
        target.w[l] = tau * online.w[l] + (1.0 - tau) * target.w[l];
        target.b[l] = tau * online.b[l] + (1.0 - tau) * target.b[l];
    }
}

double max_abs_param_diff(const NetParams& a, const NetParams& b) {
    double m = 0.0;
    auto acc = [&m](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
        if (x.size() > 0) m = std::max(m, (x - y).cwiseAbs().maxCoeff());
    };
    acc(a.wx, b.wx);
    acc(a.wh, b.wh);
    acc(a.bl, b.bl);
    for (std::size_t l = 0; l < a.w.size(); ++l) {
        acc(a.w[l], b.w[l]);
        acc(a.b[l], b.b[l]);
    }
    return m;
}

}  // namespace gridmarl::nn
