#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace gridmarl::nn {

enum class Activation { Linear, ReLU, Tanh };

// Dense 2-D value container used at the serialization boundary (checkpoints,
// bindings). Row-major; vectors are (n, 1).
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    std::size_t count() const;
    void validate() const;  // product(shape) == len(values), all finite

    static Tensor from(const Eigen::MatrixXd& m);
    static Tensor from(const Eigen::VectorXd& v);
    Eigen::MatrixXd matrix() const;
    Eigen::VectorXd vector() const;
};

// Recurrent head followed by a dense stack:
//   LSTM(lstm_hidden) -> dense_hidden[0] -> ... -> output_dim
// lstm_hidden == 0 drops the recurrence; the dense stack then reads the last
// sequence element directly.
struct NetSpec {
    int input_dim = 2;
    int lstm_hidden = 16;
    std::vector<int> dense_hidden = {64, 32, 16};
    int output_dim = 1;
    Activation hidden_act = Activation::Tanh;
    Activation output_act = Activation::Linear;

    void validate() const;
    std::size_t param_count() const;
    bool operator==(const NetSpec&) const = default;
};

struct NetParams {
    NetSpec spec;
    // LSTM gate blocks stacked row-wise in order [input; forget; cell; output].
    Eigen::MatrixXd wx;  // (4h x input_dim)
    Eigen::MatrixXd wh;  // (4h x h)
    Eigen::VectorXd bl;  // (4h)
    std::vector<Eigen::MatrixXd> w;  // dense weights, (out x in)
    std::vector<Eigen::VectorXd> b;  // dense biases

    static NetParams zeros(const NetSpec& spec);
    // Uniform +-1/sqrt(fan_in) weights, zero biases.
    static NetParams init(const NetSpec& spec, std::uint64_t seed);

    std::vector<Tensor> tensors() const;
    void load_tensors(const std::vector<Tensor>& ts);
};

// Mirrors the parameter layout of NetParams.
struct GradBuffer {
    Eigen::MatrixXd wx, wh;
    Eigen::VectorXd bl;
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    static GradBuffer zeros(const NetSpec& spec);
    void scale(double k);
};

// Activations recorded by forward() for exact reverse accumulation. A cache
// is single-use: backward() consumes it.
struct ForwardCache {
    bool valid = false;
    int batch = 0;
    std::vector<Eigen::MatrixXd> x;                 // inputs per timestep
    std::vector<Eigen::MatrixXd> gi, gf, gg, go;    // activated gates
    std::vector<Eigen::MatrixXd> c, tanh_c, h;      // cell/hidden per timestep
    std::vector<Eigen::MatrixXd> dense_in;          // input to each dense layer
    std::vector<Eigen::MatrixXd> dense_pre;         // pre-activation per layer
};

// seq: T matrices of (input_dim x batch); returns (output_dim x batch).
Eigen::MatrixXd forward(const NetParams& p, const std::vector<Eigen::MatrixXd>& seq,
                        ForwardCache* cache = nullptr);

struct BackwardResult {
    GradBuffer grads;
    std::vector<Eigen::MatrixXd> input_grads;  // d(output . upstream)/d seq[t]
};

// Exact gradients w.r.t. every parameter and the input sequence, via reverse
// accumulation through the dense stack and BPTT through the LSTM window.
// Throws std::logic_error on a stale (already consumed) cache.
BackwardResult backward(const NetParams& p, ForwardCache& cache,
                        const Eigen::MatrixXd& upstream);

struct AdamState {
    long step = 0;
    GradBuffer m, v;
    static AdamState zeros(const NetSpec& spec);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

void adam_step(NetParams& p, const GradBuffer& g, AdamState& state, double lr);
void sgd_step(NetParams& p, const GradBuffer& g, double lr);

enum class Optimizer { Adam, Sgd };
struct OptimizerState {
    Optimizer kind = Optimizer::Adam;
    AdamState adam;
    static OptimizerState make(Optimizer kind, const NetSpec& spec);
};
void optimizer_step(NetParams& p, const GradBuffer& g, OptimizerState& state, double lr);

// target <- tau * online + (1 - tau) * target, elementwise.
void soft_update(NetParams& target, const NetParams& online, double tau);

double max_abs_param_diff(const NetParams& a, const NetParams& b);

}  // namespace gridmarl::nn
