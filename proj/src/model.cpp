#include "tqd/model.hpp"

#include "tqd/error.hpp"
#include "tqd/io.hpp"
#include "tqd/rng.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <numbers>

namespace tqd {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::size_t ModelConfig::unit_dim() const { return per_frame ? shape.frame_size() : shape.size(); }

std::size_t ModelConfig::units_per_video() const { return per_frame ? static_cast<std::size_t>(shape.frames) : 1; }

std::size_t ModelConfig::input_dim() const {
    if (!per_frame) return unit_dim() + embed_dim();
    return unit_dim() * (1 + 2 * static_cast<std::size_t>(temporal_context)) + embed_dim() +
           static_cast<std::size_t>(shape.frames);
}

std::size_t ModelConfig::parameter_count() const {
    const std::size_t in = input_dim();
    const auto h1 = static_cast<std::size_t>(hidden1);
    const auto h2 = static_cast<std::size_t>(hidden2);
    const std::size_t out = unit_dim();
    const std::size_t skip = gated_skip ? gate_dim() + 1 : 0;
    const auto ph = static_cast<std::size_t>(pixel_hidden);
    const std::size_t pixel = ph * (3 + embed_dim() + gate_dim());
    return h1 * in + h1 + h2 * h1 + h2 + (out * h2 + out) * units_per_video() + skip + pixel;
}

void ModelConfig::validate() const {
    if (shape.frames < 1 || shape.height < 1 || shape.width < 1) throw Error(ErrorKind::Usage, "bad video shape");
    if (hidden1 < 1 || hidden2 < 1) throw Error(ErrorKind::Usage, "hidden widths must be positive");
    if (frequencies < 0 || frequencies > 30) throw Error(ErrorKind::Usage, "frequencies must lie in [0, 30]");
    if (pixel_hidden < 0) throw Error(ErrorKind::Usage, "pixel_hidden must be non-negative");
    if (temporal_context < 0 || temporal_context >= shape.frames) {
        throw Error(ErrorKind::Usage, "temporal_context must lie in [0, frames)");
    }
}

VectorXd gate_features(double t, int frequencies) {
    VectorXd g(2 * frequencies + 1);
    g.head(2 * frequencies) = time_embedding(t, frequencies);
    // The ideal velocity is steep in x_t near the data end (slope ~ 1/t); sinusoids
    // alone cannot follow that, so the gates also get a bounded 1/t.
    g[2 * frequencies] = 1.0 / (t + 0.1);
    return g;
}

VectorXd time_embedding(double t, int frequencies) {
    VectorXd e(2 * frequencies);
    double w = std::numbers::pi;
    for (int k = 0; k < frequencies; ++k, w *= 2.0) {
        e[2 * k] = std::sin(w * t);
        e[2 * k + 1] = std::cos(w * t);
    }
    return e;
}

std::array<VelocityModel::Block, 13> VelocityModel::blocks() const {
    const std::size_t in = config_.input_dim();
    const auto h1 = static_cast<std::size_t>(config_.hidden1);
    const auto h2 = static_cast<std::size_t>(config_.hidden2);
    const std::size_t out = config_.unit_dim();
    const std::size_t e = config_.gated_skip ? config_.gate_dim() : 0;
    const std::size_t one = config_.gated_skip ? 1 : 0;
    const auto p = static_cast<std::size_t>(config_.pixel_hidden);
    const std::size_t pe = p * config_.embed_dim();
    const std::size_t pg = p * config_.gate_dim();
    std::array<Block, 13> b{{{"W1", 0, h1 * in},
                            {"b1", 0, h1},
                            {"W2", 0, h2 * h1},
                            {"b2", 0, h2},
                            {"W3", 0, out * h2 * config_.units_per_video()},
                            {"b3", 0, out * config_.units_per_video()},
                            {"ws", 0, e},
                            {"bs", 0, one},
                            {"pa", 0, p},
                            {"pB", 0, pe},
                            {"pc", 0, p},
                            {"pO", 0, pg},
                            {"po", 0, p}}};
    std::size_t off = 0;
    for (auto& blk : b) {
        blk.offset = off;
        off += blk.size;
    }
    return b;
}

VelocityModel::VelocityModel(const ModelConfig& config) : config_(config) {
    config_.validate();
    theta_ = VectorXd::Zero(static_cast<Eigen::Index>(config_.parameter_count()));
    Rng rng(config_.seed);
    const auto b = blocks();
    const double fan_in[3] = {static_cast<double>(config_.input_dim()), static_cast<double>(config_.hidden1),
                              static_cast<double>(config_.hidden2)};
    for (int layer = 0; layer < 3; ++layer) {
        if (layer == 2 && config_.zero_output_layer) break;
        const auto& w = b[static_cast<std::size_t>(2 * layer)];
        const double scale = 1.0 / std::sqrt(fan_in[layer]);
        for (std::size_t i = 0; i < w.size; ++i) theta_[static_cast<Eigen::Index>(w.offset + i)] = scale * rng.normal();
    }
    // pixel units start as random ramps; their output weights start at zero
    for (std::size_t i = 0; i < b[8].size; ++i) theta_[static_cast<Eigen::Index>(b[8].offset + i)] = 2.0 * rng.normal();
    for (std::size_t i = 0; i < b[10].size; ++i) theta_[static_cast<Eigen::Index>(b[10].offset + i)] = rng.normal();
}

VelocityModel::VelocityModel(const ModelConfig& config, VectorXd parameters)
    : config_(config), theta_(std::move(parameters)) {
    config_.validate();
    if (static_cast<std::size_t>(theta_.size()) != config_.parameter_count()) {
        throw Error(ErrorKind::Artifact, "parameter vector does not match the model architecture");
    }
}

namespace {

struct Views {
    Eigen::Map<const MatrixXd> w1, w2;
    Eigen::Map<const MatrixXd> w3;  // per frame position: [W3_0 W3_1 ...]
    Eigen::Map<const VectorXd> b1, b2;
    Eigen::Map<const MatrixXd> b3;  // one column per frame position
    Eigen::Map<const VectorXd> ws;
    double bs;
    Eigen::Map<const VectorXd> pa;
    Eigen::Map<const MatrixXd> pB;
    Eigen::Map<const VectorXd> pc;
    Eigen::Map<const MatrixXd> pO;
    Eigen::Map<const VectorXd> po;
};

Views views(const ModelConfig& c, const VectorXd& theta, const std::array<VelocityModel::Block, 13>& b) {
    const double* p = theta.data();
    const auto in = static_cast<Eigen::Index>(c.input_dim());
    const auto out = static_cast<Eigen::Index>(c.unit_dim());
    const Eigen::Index h1 = c.hidden1;
    const Eigen::Index h2 = c.hidden2;
    return Views{Eigen::Map<const MatrixXd>(p + b[0].offset, h1, in),
                 Eigen::Map<const MatrixXd>(p + b[2].offset, h2, h1),
                 Eigen::Map<const MatrixXd>(p + b[4].offset, out, h2 * static_cast<Eigen::Index>(c.units_per_video())),
                 Eigen::Map<const VectorXd>(p + b[1].offset, h1),
                 Eigen::Map<const VectorXd>(p + b[3].offset, h2),
                 Eigen::Map<const MatrixXd>(p + b[5].offset, out, static_cast<Eigen::Index>(c.units_per_video())),
                 Eigen::Map<const VectorXd>(p + b[6].offset, static_cast<Eigen::Index>(b[6].size)),
                 c.gated_skip ? p[b[7].offset] : 0.0,
                 Eigen::Map<const VectorXd>(p + b[8].offset, c.pixel_hidden),
                 Eigen::Map<const MatrixXd>(p + b[9].offset, c.pixel_hidden, static_cast<Eigen::Index>(c.embed_dim())),
                 Eigen::Map<const VectorXd>(p + b[10].offset, c.pixel_hidden),
                 Eigen::Map<const MatrixXd>(p + b[11].offset, c.pixel_hidden, static_cast<Eigen::Index>(c.gate_dim())),
                 Eigen::Map<const VectorXd>(p + b[12].offset, c.pixel_hidden)};
}

Eigen::Index b3_columns(const ModelConfig& c) { return static_cast<Eigen::Index>(c.units_per_video()); }

// Columns p, p + n, p + 2n, ... of m (the units at one frame position).
using Strided = Eigen::Map<MatrixXd, 0, Eigen::OuterStride<>>;
using ConstStrided = Eigen::Map<const MatrixXd, 0, Eigen::OuterStride<>>;
Strided every_nth(MatrixXd& m, Eigen::Index p, Eigen::Index n) {
    return Strided(m.data() + p * m.rows(), m.rows(), m.cols() / n, Eigen::OuterStride<>(n * m.rows()));
}
ConstStrided every_nth(const MatrixXd& m, Eigen::Index p, Eigen::Index n) {
    return ConstStrided(m.data() + p * m.rows(), m.rows(), m.cols() / n, Eigen::OuterStride<>(n * m.rows()));
}

void require_finite(const MatrixXd& m, int layer) {
    if (!m.allFinite()) throw Error(ErrorKind::Numeric, "non-finite activation at layer " + std::to_string(layer));
}

}  // namespace

// Activations of one pass; columns are units (whole videos, or single frames).
struct VelocityModel::Trace {
    MatrixXd xt;  // unit_dim x units
    MatrixXd in;
    MatrixXd gate;  // gate_features(t) per unit
    MatrixXd a1;
    MatrixXd a2;
    VectorXd gain;
    MatrixXd pz;                  // pixel_hidden x units: per-unit pre-activation offsets
    MatrixXd pout;                // pixel_hidden x units: per-unit output weights
    std::vector<MatrixXd> ptanh;  // one unit_dim x units map per pixel unit
    MatrixXd y;
};

VelocityModel::Trace VelocityModel::run(const MatrixXd& x_t, std::span<const double> t) const {
    const auto d = static_cast<Eigen::Index>(config_.video_dim());
    if (x_t.rows() != d || static_cast<std::size_t>(x_t.cols()) != t.size()) {
        throw Error(ErrorKind::Data, "model input shape mismatch");
    }
    const auto ud = static_cast<Eigen::Index>(config_.unit_dim());
    const auto per = static_cast<Eigen::Index>(config_.units_per_video());
    const auto e = static_cast<Eigen::Index>(config_.embed_dim());
    const Eigen::Index units = x_t.cols() * per;

    Trace tr;
    tr.xt = Eigen::Map<const MatrixXd>(x_t.data(), ud, units);
    tr.in = MatrixXd::Zero(static_cast<Eigen::Index>(config_.input_dim()), units);
    tr.in.topRows(ud) = tr.xt;
    tr.gate.resize(static_cast<Eigen::Index>(config_.gate_dim()), units);
    for (Eigen::Index n = 0; n < x_t.cols(); ++n) {
        const VectorXd emb = time_embedding(t[static_cast<std::size_t>(n)], config_.frequencies);
        const VectorXd gate = gate_features(t[static_cast<std::size_t>(n)], config_.frequencies);
        for (Eigen::Index f = 0; f < per; ++f) {
            const Eigen::Index col = n * per + f;
            tr.in.col(col).segment(ud, e) = emb;
            tr.gate.col(col) = gate;
            if (!config_.per_frame) continue;
            tr.in(ud + e + f, col) = 1.0;  // one-hot frame position
            // neighbouring frames f-k and f+k; zero past either end of the clip
            Eigen::Index row = ud + e + per;
            for (int k = 1; k <= config_.temporal_context; ++k) {
                for (const Eigen::Index g : {f - k, f + k}) {
                    if (g >= 0 && g < per) tr.in.middleRows(row, ud).col(col) = tr.xt.col(n * per + g);
                    row += ud;
                }
            }
        }
    }
    const auto v = views(config_, theta_, blocks());
    tr.a1 = ((v.w1 * tr.in).colwise() + v.b1).array().tanh().matrix();
    require_finite(tr.a1, 1);
    tr.a2 = ((v.w2 * tr.a1).colwise() + v.b2).array().tanh().matrix();
    require_finite(tr.a2, 2);
    tr.y.resize(ud, units);
    for (Eigen::Index p = 0; p < per; ++p) {
        every_nth(tr.y, p, per).noalias() = v.w3.middleCols(p * v.w2.rows(), v.w2.rows()) * every_nth(tr.a2, p, per);
    }
    for (Eigen::Index u = 0; u < units; ++u) tr.y.col(u) += v.b3.col(u % per);
    if (config_.gated_skip) {
        tr.gain = (tr.gate.transpose() * v.ws).array() + v.bs;
        tr.y += tr.xt * tr.gain.asDiagonal();
    }
    if (config_.pixel_hidden > 0) {
        const auto emb = tr.in.middleRows(ud, e);
        tr.pz = (v.pB * emb).colwise() + v.pc;
        tr.pout = (v.pO * tr.gate).colwise() + v.po;
        tr.ptanh.resize(static_cast<std::size_t>(config_.pixel_hidden));
        for (Eigen::Index k = 0; k < config_.pixel_hidden; ++k) {
            auto& h = tr.ptanh[static_cast<std::size_t>(k)];
            h = ((v.pa[k] * tr.xt).rowwise() + tr.pz.row(k)).array().tanh().matrix();
            tr.y += h * tr.pout.row(k).asDiagonal();
        }
    }
    require_finite(tr.y, 3);
    return tr;
}

MatrixXd VelocityModel::forward(const MatrixXd& x_t, std::span<const double> t) const {
    const Trace tr = run(x_t, t);
    return Eigen::Map<const MatrixXd>(tr.y.data(), x_t.rows(), x_t.cols());
}

VectorXd VelocityModel::forward(std::span<const double> x_t, double t) const {
    if (x_t.size() != config_.video_dim()) throw Error(ErrorKind::Data, "model input shape mismatch");
    const MatrixXd x = Eigen::Map<const MatrixXd>(x_t.data(), static_cast<Eigen::Index>(x_t.size()), 1);
    const double ts[1] = {t};
    return forward(x, ts).col(0);
}

namespace {

MatrixXd interpolate(const MatrixXd& x0, const MatrixXd& x1, std::span<const double> t) {
    if (x0.rows() != x1.rows() || x0.cols() != x1.cols() || static_cast<std::size_t>(x0.cols()) != t.size()) {
        throw Error(ErrorKind::Data, "x0 / x1 / t shape mismatch");
    }
    MatrixXd xt(x0.rows(), x0.cols());
    for (Eigen::Index j = 0; j < x0.cols(); ++j) {
        const double tj = t[static_cast<std::size_t>(j)];
        if (!(tj >= 0.0 && tj <= 1.0)) throw Error(ErrorKind::Data, "timestep must lie in [0, 1]");
        flow_interpolate_into(std::span<const double>(x0.col(j).data(), static_cast<std::size_t>(x0.rows())),
                              std::span<const double>(x1.col(j).data(), static_cast<std::size_t>(x1.rows())), tj,
                              std::span<double>(xt.col(j).data(), static_cast<std::size_t>(xt.rows())));
    }
    return xt;
}

}  // namespace

VelocityModel::LossGrad VelocityModel::loss_and_grad(const MatrixXd& x0, const MatrixXd& x1,
                                                     std::span<const double> t) const {
    const MatrixXd xt = interpolate(x0, x1, t);
    const Trace tr = run(xt, t);
    const auto b = blocks();
    const auto v = views(config_, theta_, b);
    const Eigen::Index h1 = config_.hidden1;
    const Eigen::Index h2 = config_.hidden2;
    const auto ud = static_cast<Eigen::Index>(config_.unit_dim());
    const auto e = static_cast<Eigen::Index>(config_.embed_dim());
    const Eigen::Index units = tr.y.cols();

    const MatrixXd target = x1 - x0;
    const MatrixXd r = tr.y - Eigen::Map<const MatrixXd>(target.data(), ud, units);
    const double denom = static_cast<double>(x0.rows()) * static_cast<double>(x0.cols());
    LossGrad out;
    out.loss = r.squaredNorm() / denom;
    out.grad = VectorXd::Zero(theta_.size());
    double* g = out.grad.data();

    const MatrixXd gy = (2.0 / denom) * r;
    const Eigen::Index per = b3_columns(config_);
    MatrixXd ga2(h2, units);
    {
        Eigen::Map<MatrixXd> gw3(g + b[4].offset, ud, h2 * per);
        for (Eigen::Index p = 0; p < per; ++p) {
            const auto gyp = every_nth(gy, p, per);
            gw3.middleCols(p * h2, h2).noalias() = gyp * every_nth(tr.a2, p, per).transpose();
            every_nth(ga2, p, per).noalias() = v.w3.middleCols(p * h2, h2).transpose() * gyp;
        }
    }
    {
        Eigen::Map<MatrixXd> gb3(g + b[5].offset, ud, per);
        for (Eigen::Index u = 0; u < units; ++u) gb3.col(u % per) += gy.col(u);
    }

    if (config_.gated_skip) {
        // d loss / d gain_u = sum_i gy(i, u) * x_t(i, u)
        const VectorXd dgain = (gy.array() * tr.xt.array()).colwise().sum().transpose();
        Eigen::Map<VectorXd>(g + b[6].offset, tr.gate.rows()) = tr.gate * dgain;
        g[b[7].offset] = dgain.sum();
    }

    if (config_.pixel_hidden > 0) {
        const Eigen::Index p = config_.pixel_hidden;
        const auto emb = tr.in.middleRows(ud, e);
        MatrixXd dout(p, units);
        MatrixXd dz(p, units);
        for (Eigen::Index k = 0; k < p; ++k) {
            const auto& h = tr.ptanh[static_cast<std::size_t>(k)];
            dout.row(k) = (gy.array() * h.array()).colwise().sum();
            const MatrixXd gz = ((gy * tr.pout.row(k).asDiagonal()).array() * (1.0 - h.array().square())).matrix();
            g[b[8].offset + static_cast<std::size_t>(k)] = (gz.array() * tr.xt.array()).sum();
            dz.row(k) = gz.colwise().sum();
        }
        Eigen::Map<MatrixXd>(g + b[9].offset, p, e).noalias() = dz * emb.transpose();
        Eigen::Map<VectorXd>(g + b[10].offset, p) = dz.rowwise().sum();
        Eigen::Map<MatrixXd>(g + b[11].offset, p, tr.gate.rows()).noalias() = dout * tr.gate.transpose();
        Eigen::Map<VectorXd>(g + b[12].offset, p) = dout.rowwise().sum();
    }

    const MatrixXd gz2 = (ga2.array() * (1.0 - tr.a2.array().square())).matrix();
    Eigen::Map<MatrixXd>(g + b[2].offset, h2, h1).noalias() = gz2 * tr.a1.transpose();
    Eigen::Map<VectorXd>(g + b[3].offset, h2) = gz2.rowwise().sum();

    const MatrixXd gz1 = ((v.w2.transpose() * gz2).array() * (1.0 - tr.a1.array().square())).matrix();
    Eigen::Map<MatrixXd>(g + b[0].offset, h1, tr.in.rows()).noalias() = gz1 * tr.in.transpose();
    Eigen::Map<VectorXd>(g + b[1].offset, h1) = gz1.rowwise().sum();

    if (!std::isfinite(out.loss) || !out.grad.allFinite()) throw Error(ErrorKind::Numeric, "non-finite loss or gradient");
    return out;
}

VelocityModel::LossGrad VelocityModel::loss_and_grad(std::span<const double> x0, std::span<const double> x1,
                                                     double t) const {
    if (x0.size() != x1.size()) throw Error(ErrorKind::Data, "x0 / x1 shape mismatch");
    const auto d = static_cast<Eigen::Index>(x0.size());
    const double ts[1] = {t};
    return loss_and_grad(Eigen::Map<const MatrixXd>(x0.data(), d, 1), Eigen::Map<const MatrixXd>(x1.data(), d, 1), ts);
}

double VelocityModel::loss(const MatrixXd& x0, const MatrixXd& x1, std::span<const double> t) const {
    const MatrixXd xt = interpolate(x0, x1, t);
    const MatrixXd r = forward(xt, t) - (x1 - x0);
    return r.squaredNorm() / (static_cast<double>(x0.rows()) * static_cast<double>(x0.cols()));
}

AdamOptimizer::AdamOptimizer(std::size_t n, AdamConfig config)
    : config_(config), m_(VectorXd::Zero(static_cast<Eigen::Index>(n))), v_(VectorXd::Zero(static_cast<Eigen::Index>(n))) {}

void AdamOptimizer::step(VectorXd& params, const VectorXd& grad) {
    if (grad.size() != m_.size() || params.size() != m_.size()) throw Error(ErrorKind::Data, "optimizer size mismatch");
    ++t_;
    m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
    v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    params.array() -= config_.learning_rate * (m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.epsilon);
    if (!params.allFinite()) throw Error(ErrorKind::Numeric, "non-finite parameter after update");
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

constexpr std::string_view kCkptMagic = "TQDCKPT1";

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
    const auto& c = ckpt.model.config();
    nlohmann::json h = {{"frames", c.shape.frames},   {"height", c.shape.height},     {"width", c.shape.width},
                        {"hidden1", c.hidden1},       {"hidden2", c.hidden2},         {"frequencies", c.frequencies},
                        {"gated_skip", c.gated_skip},
                        {"per_frame", c.per_frame},   {"temporal_context", c.temporal_context},
                        {"pixel_hidden", c.pixel_hidden},
                        {"model_seed", c.seed},       {"parameters", c.parameter_count()},
                        {"step", ckpt.step},          {"seed", ckpt.seed}};
    const std::string header = h.dump();
    std::string out(kCkptMagic);
    const auto len = static_cast<std::uint32_t>(header.size());
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xffu));
    out += header;
    const auto& theta = ckpt.model.parameters();
    out.reserve(out.size() + 8 * static_cast<std::size_t>(theta.size()));
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const auto bits = std::bit_cast<std::uint64_t>(theta[i]);
        for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xffu));
    }
    return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
    if (bytes.size() < kCkptMagic.size() + 4 || bytes.substr(0, kCkptMagic.size()) != kCkptMagic) {
        throw Error(ErrorKind::Artifact, "not a checkpoint (bad magic)");
    }
    std::size_t pos = kCkptMagic.size();
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    if (bytes.size() < pos + len) throw Error(ErrorKind::Artifact, "truncated checkpoint header");
    ModelConfig c;
    Checkpoint ckpt;
    std::size_t count = 0;
    try {
        const auto h = nlohmann::json::parse(bytes.substr(pos, len));
        c.shape.frames = h.at("frames").get<int>();
        c.shape.height = h.at("height").get<int>();
        c.shape.width = h.at("width").get<int>();
        c.hidden1 = h.at("hidden1").get<int>();
        c.hidden2 = h.at("hidden2").get<int>();
        c.frequencies = h.at("frequencies").get<int>();
        c.gated_skip = h.at("gated_skip").get<bool>();
        c.per_frame = h.at("per_frame").get<bool>();
        c.temporal_context = h.at("temporal_context").get<int>();
        c.pixel_hidden = h.at("pixel_hidden").get<int>();
        c.seed = h.at("model_seed").get<std::uint64_t>();
        count = h.at("parameters").get<std::size_t>();
        ckpt.step = h.at("step").get<std::uint64_t>();
        ckpt.seed = h.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Artifact, std::string("corrupt checkpoint header: ") + e.what());
    }
    pos += len;
    try {
        c.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::Artifact, std::string("checkpoint architecture invalid: ") + e.what());
    }
    if (count != c.parameter_count()) throw Error(ErrorKind::Artifact, "checkpoint parameter count does not match widths");
    if (bytes.size() != pos + 8 * count) throw Error(ErrorKind::Artifact, "checkpoint payload size mismatch");
    VectorXd theta(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + 8 * i + k])) << (8 * k);
        theta[static_cast<Eigen::Index>(i)] = std::bit_cast<double>(bits);
    }
    ckpt.model = VelocityModel(c, std::move(theta));
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    io::write_text(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(io::read_text(path)); }

}  // namespace tqd
