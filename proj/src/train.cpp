#include "xsdist/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "xsdist/csv_io.hpp"
#include "xsdist/errors.hpp"
#include "json.hpp"

namespace xsdist {

// ---------------------------------------------------------------------------
// Particle flow
// ---------------------------------------------------------------------------

FlowResult particle_flow(const FlowConfig& cfg) {
    if (cfg.n_particles < 1) throw std::invalid_argument("particle_flow: need K >= 1");
    if (!(cfg.step_size > 0.0)) throw std::invalid_argument("particle_flow: step_size > 0");
    const XiEvaluator ev = XiEvaluator::make(cfg.n_dim, XiMethod::QuadraticSurrogate);

    FlowResult result;
    result.step_warning = cfg.step_size > static_cast<double>(cfg.n_particles);

    PointCloud particles = sample_normal_cloud(cfg.n_dim, cfg.n_particles, cfg.seed);
    if (cfg.init == FlowInit::Cluster) {
        for (std::size_t k = 0; k < particles.count(); ++k) {
            auto row = particles.row(k);
            for (std::size_t d = 0; d < row.size(); ++d) {
                row[d] *= cfg.cluster_spread;
                if (d == 0) row[d] += cfg.cluster_radius;
            }
        }
    }

    double step = cfg.step_size;
    int consecutive_increases = 0;
    double prev_loss = latent_loss(particles, ev).total;
    result.trajectory.reserve(cfg.n_steps + 1);
    result.trajectory.push_back(prev_loss);
    for (std::size_t it = 0; it < cfg.n_steps; ++it) {
        const PointCloud grad = latent_loss_gradient(particles, ev);
        for (std::size_t k = 0; k < particles.count(); ++k) {
            auto row = particles.row(k);
            const auto g = grad.row(k);
            for (std::size_t d = 0; d < row.size(); ++d) row[d] -= step * g[d];
        }
        const double loss = latent_loss(particles, ev).total;
        result.trajectory.push_back(loss);
        if (loss > prev_loss + 1e-12) {
            ++consecutive_increases;
            if (cfg.halve_on_increase) step *= 0.5;
            if (consecutive_increases >= 10) result.diverged = true;
        } else {
            consecutive_increases = 0;
        }
        prev_loss = loss;
    }
    result.particles = std::move(particles);
    return result;
}

// ---------------------------------------------------------------------------
// Dense nets
// ---------------------------------------------------------------------------

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.w.size() + l.b.size();
    return n;
}

Mlp make_mlp(const std::vector<std::size_t>& widths, Activation out_act, Seed seed,
             std::uint64_t sample_offset) {
    if (widths.size() < 2) throw std::invalid_argument("make_mlp: need at least two widths");
    Mlp net;
    const Philox gen(seed);
    std::uint64_t sample = sample_offset;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
        DenseLayer layer;
        layer.in = widths[l];
        layer.out = widths[l + 1];
        layer.w.resize(layer.in * layer.out);
        layer.b.assign(layer.out, 0.0);
        layer.act = (l + 2 == widths.size()) ? out_act : Activation::ReLU;
        // symmetric uniform init scaled by 1/sqrt(fan_in)
        const double scale = 1.0 / std::sqrt(static_cast<double>(layer.in));
        SampleCursor cur(gen, sample++);
        for (auto& w : layer.w) w = (2.0 * cur.uniform() - 1.0) * scale;
        net.layers.push_back(std::move(layer));
    }
    return net;
}

namespace {

double activate(Activation act, double x) {
    switch (act) {
        case Activation::Identity: return x;
        case Activation::ReLU: return x > 0.0 ? x : 0.0;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
    }
    return x;
}

double activate_grad_from_pre(Activation act, double pre) {
    switch (act) {
        case Activation::Identity: return 1.0;
        case Activation::ReLU: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid: {
            const double y = 1.0 / (1.0 + std::exp(-pre));
            return y * (1.0 - y);
        }
    }
    return 1.0;
}

}  // namespace

PointCloud mlp_forward(const Mlp& net, const PointCloud& batch, ForwardCache* cache) {
    if (batch.dim() != net.input_dim())
        throw std::invalid_argument("mlp_forward: batch width does not match input layer");
    if (cache) {
        cache->pre.clear();
        cache->post.clear();
    }
    PointCloud x = batch;
    for (const auto& layer : net.layers) {
        PointCloud pre(x.count(), layer.out);
        for (std::size_t k = 0; k < x.count(); ++k) {
            const auto in = x.row(k);
            auto out = pre.row(k);
            for (std::size_t o = 0; o < layer.out; ++o) {
                double s = layer.b[o];
                const double* w = &layer.w[o * layer.in];
                for (std::size_t i = 0; i < layer.in; ++i) s += w[i] * in[i];
                out[o] = s;
            }
        }
        PointCloud post(pre.count(), layer.out);
        for (std::size_t k = 0; k < pre.count(); ++k)
            for (std::size_t o = 0; o < layer.out; ++o)
                post.at(k, o) = activate(layer.act, pre.at(k, o));
        if (cache) {
            cache->pre.push_back(pre);
            cache->post.push_back(post);
        }
        x = std::move(post);
    }
    return x;
}

PointCloud mlp_backward(const Mlp& net, const PointCloud& batch, const ForwardCache& cache,
                        const PointCloud& grad_output, Mlp& grads) {
    grads.layers.resize(net.layers.size());
    PointCloud delta = grad_output;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const auto& layer = net.layers[li];
        auto& g = grads.layers[li];
        g.in = layer.in;
        g.out = layer.out;
        g.act = layer.act;
        g.w.assign(layer.w.size(), 0.0);
        g.b.assign(layer.b.size(), 0.0);
        const PointCloud& input = li == 0 ? batch : cache.post[li - 1];
        const PointCloud& pre = cache.pre[li];
        PointCloud next_delta(delta.count(), layer.in);
        for (std::size_t k = 0; k < delta.count(); ++k) {
            const auto in = input.row(k);
            auto nd = next_delta.row(k);
            for (std::size_t o = 0; o < layer.out; ++o) {
                const double d = delta.at(k, o) * activate_grad_from_pre(layer.act, pre.at(k, o));
                g.b[o] += d;
                double* gw = &g.w[o * layer.in];
                const double* w = &layer.w[o * layer.in];
                for (std::size_t i = 0; i < layer.in; ++i) {
                    gw[i] += d * in[i];
                    nd[i] += d * w[i];
                }
            }
        }
        delta = std::move(next_delta);
    }
    return delta;
}

std::pair<PointCloud, PointCloud> dense_forward(const TrainState& state,
                                                const PointCloud& batch) {
    PointCloud codes = mlp_forward(state.encoder, batch);
    PointCloud recon = mlp_forward(state.decoder, codes);
    return {std::move(codes), std::move(recon)};
}

std::pair<Mlp, Mlp> dense_backward(const TrainState& state, const PointCloud& batch,
                                   const PointCloud& grad_codes, const PointCloud& grad_recon) {
    ForwardCache enc_cache, dec_cache;
    const PointCloud codes = mlp_forward(state.encoder, batch, &enc_cache);
    mlp_forward(state.decoder, codes, &dec_cache);
    Mlp dec_grads, enc_grads;
    PointCloud grad_codes_total = mlp_backward(state.decoder, codes, dec_cache, grad_recon,
                                               dec_grads);
    for (std::size_t k = 0; k < grad_codes_total.count(); ++k)
        for (std::size_t d = 0; d < grad_codes_total.dim(); ++d)
            grad_codes_total.at(k, d) += grad_codes.at(k, d);
    mlp_backward(state.encoder, batch, enc_cache, grad_codes_total, enc_grads);
    return {std::move(enc_grads), std::move(dec_grads)};
}

// ---------------------------------------------------------------------------
// Parameter flattening
// ---------------------------------------------------------------------------

namespace {

template <class Fn>
void for_each_parameter(const TrainState& state, Fn&& fn) {
    for (const Mlp* net : {&state.encoder, &state.decoder})
        for (const auto& l : net->layers) {
            for (double v : l.w) fn(v);
            for (double v : l.b) fn(v);
        }
}

}  // namespace

std::vector<double> flatten_parameters(const TrainState& state) {
    std::vector<double> out;
    out.reserve(state.parameter_count());
    for_each_parameter(state, [&](double v) { out.push_back(v); });
    return out;
}

void unflatten_parameters(TrainState& state, std::span<const double> params) {
    std::size_t pos = 0;
    for (Mlp* net : {&state.encoder, &state.decoder})
        for (auto& l : net->layers) {
            for (auto& v : l.w) v = params[pos++];
            for (auto& v : l.b) v = params[pos++];
        }
    if (pos != params.size())
        throw std::invalid_argument("unflatten_parameters: size mismatch");
}

std::vector<double> flatten_gradients(const Mlp& enc_grads, const Mlp& dec_grads) {
    std::vector<double> out;
    for (const Mlp* net : {&enc_grads, &dec_grads})
        for (const auto& l : net->layers) {
            out.insert(out.end(), l.w.begin(), l.w.end());
            out.insert(out.end(), l.b.begin(), l.b.end());
        }
    return out;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

EpochLog evaluate_losses(const TrainState& state, const PointCloud& batch,
                         const XiEvaluator& ev, bool with_rec, bool with_lat) {
    auto [codes, recon] = dense_forward(state, batch);
    EpochLog log;
    log.step = state.step;
    if (with_lat) log.loss_lat = latent_loss(codes, ev).total;
    if (with_rec) {
        double s = 0.0;
        for (std::size_t k = 0; k < batch.count(); ++k)
            for (std::size_t d = 0; d < batch.dim(); ++d) {
                const double diff = recon.at(k, d) - batch.at(k, d);
                s += diff * diff;
            }
        log.loss_rec = s / static_cast<double>(batch.count());
    }
    log.loss_global = log.loss_rec + state.lambda * log.loss_lat;
    return log;
}

VaeResult xsvae_train(const PointCloud& dataset, const VaeConfig& cfg) {
    if (cfg.encoder_widths.front() != dataset.dim())
        throw std::invalid_argument("xsvae_train: encoder input width must match data dim");
    if (cfg.encoder_widths.back() != cfg.decoder_widths.front())
        throw std::invalid_argument("xsvae_train: latent widths disagree");
    const std::size_t latent_dim = cfg.encoder_widths.back();
    const XiEvaluator ev =
        XiEvaluator::make(static_cast<int>(latent_dim), XiMethod::QuadraticSurrogate);

    VaeResult result;
    result.state.encoder = make_mlp(cfg.encoder_widths, Activation::Identity,
                                    cfg.seed.with_stream(cfg.seed.stream_id * 4 + 1));
    result.state.decoder = make_mlp(cfg.decoder_widths, cfg.decoder_out,
                                    cfg.seed.with_stream(cfg.seed.stream_id * 4 + 2));
    TrainState& state = result.state;
    state.lambda = cfg.lambda;
    state.adam_m.assign(state.parameter_count(), 0.0);
    state.adam_v.assign(state.parameter_count(), 0.0);

    const Philox shuffler(cfg.seed.with_stream(cfg.seed.stream_id * 4 + 3));
    const std::size_t n = dataset.count();
    const std::size_t batch_size = std::min(cfg.batch, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    PointCloud batch(batch_size, dataset.dim());
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates with counter-based draws: deterministic given the seed.
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(
                shuffler.uniform(epoch, static_cast<std::uint32_t>(i)) * (i + 1));
            std::swap(order[i], order[std::min(j, i)]);
        }
        for (std::size_t start = 0; start + batch_size <= n; start += batch_size) {
            for (std::size_t k = 0; k < batch_size; ++k) {
                const auto src = dataset.row(order[start + k]);
                std::copy(src.begin(), src.end(), batch.row(k).begin());
            }

            ForwardCache enc_cache, dec_cache;
            const PointCloud codes = mlp_forward(state.encoder, batch, &enc_cache);
            const PointCloud recon = mlp_forward(state.decoder, codes, &dec_cache);

            EpochLog log;
            log.step = state.step;
            log.loss_lat = latent_loss(codes, ev).total;
            double rec = 0.0;
            for (std::size_t k = 0; k < batch_size; ++k) {
                double s = 0.0;
                for (std::size_t d = 0; d < batch.dim(); ++d) {
                    const double diff = recon.at(k, d) - batch.at(k, d);
                    s += diff * diff;
                }
                rec += s;
            }
            log.loss_rec = rec / static_cast<double>(batch_size);
            log.loss_global = (cfg.train_reconstruction ? log.loss_rec : 0.0) +
                              (cfg.train_latent ? state.lambda * log.loss_lat : 0.0);
            if (!std::isfinite(log.loss_global))
                throw TrainDiverged("xsvae_train: non-finite loss at step " +
                                    std::to_string(state.step));
            result.logs.push_back(log);

            // Gradients of the optimized objective.
            PointCloud grad_recon(batch_size, batch.dim());
            if (cfg.train_reconstruction) {
                const double scale = 2.0 / static_cast<double>(batch_size);
                for (std::size_t k = 0; k < batch_size; ++k)
                    for (std::size_t d = 0; d < batch.dim(); ++d)
                        grad_recon.at(k, d) = scale * (recon.at(k, d) - batch.at(k, d));
            }
            PointCloud grad_codes(batch_size, latent_dim);
            if (cfg.train_latent && state.lambda != 0.0) {
                grad_codes = latent_loss_gradient(codes, ev);
                for (std::size_t k = 0; k < batch_size; ++k)
                    for (std::size_t d = 0; d < latent_dim; ++d)
                        grad_codes.at(k, d) *= state.lambda;
            }

            Mlp dec_grads, enc_grads;
            PointCloud code_grad_total =
                mlp_backward(state.decoder, codes, dec_cache, grad_recon, dec_grads);
            for (std::size_t k = 0; k < batch_size; ++k)
                for (std::size_t d = 0; d < latent_dim; ++d)
                    code_grad_total.at(k, d) += grad_codes.at(k, d);
            mlp_backward(state.encoder, batch, enc_cache, code_grad_total, enc_grads);

            // Adam
            const std::vector<double> g = flatten_gradients(enc_grads, dec_grads);
            std::vector<double> params = flatten_parameters(state);
            ++state.step;
            const double t = static_cast<double>(state.step);
            const double bc1 = 1.0 - std::pow(cfg.adam.beta1, t);
            const double bc2 = 1.0 - std::pow(cfg.adam.beta2, t);
            for (std::size_t i = 0; i < params.size(); ++i) {
                state.adam_m[i] = cfg.adam.beta1 * state.adam_m[i] +
                                  (1.0 - cfg.adam.beta1) * g[i];
                state.adam_v[i] = cfg.adam.beta2 * state.adam_v[i] +
                                  (1.0 - cfg.adam.beta2) * g[i] * g[i];
                const double mhat = state.adam_m[i] / bc1;
                const double vhat = state.adam_v[i] / bc2;
                params[i] -= cfg.adam.lr * mhat / (std::sqrt(vhat) + cfg.adam.eps);
            }
            unflatten_parameters(state, params);
        }
    }
    return result;
}

PointCloud generate(const TrainState& state, std::size_t n_samples, Seed seed) {
    const std::size_t latent_dim = state.decoder.input_dim();
    if (n_samples == 0) return PointCloud(0, state.decoder.output_dim());
    const PointCloud z = sample_normal_cloud(static_cast<int>(latent_dim), n_samples, seed);
    return mlp_forward(state.decoder, z);
}

// ---------------------------------------------------------------------------
// Checkpoints and logs
// ---------------------------------------------------------------------------

namespace {

nlohmann::json mlp_shapes(const Mlp& net) {
    nlohmann::json shapes = nlohmann::json::array();
    for (const auto& l : net.layers)
        shapes.push_back({{"in", l.in}, {"out", l.out}, {"act", static_cast<int>(l.act)}});
    return shapes;
}

void write_layer_csv(std::ostream& out, const DenseLayer& l) {
    bool first = true;
    for (double v : l.w) {
        if (!first) out << ',';
        out << format17(v);
        first = false;
    }
    for (double v : l.b) {
        if (!first) out << ',';
        out << format17(v);
        first = false;
    }
    out << "\n";
}

void read_layer_csv(std::istream& in, DenseLayer& l) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("checkpoint: missing layer row");
    std::istringstream ls(line);
    std::string field;
    auto next = [&]() {
        if (!std::getline(ls, field, ',')) throw IoError("checkpoint: short layer row");
        return std::stod(field);
    };
    for (auto& v : l.w) v = next();
    for (auto& v : l.b) v = next();
}

Mlp mlp_from_shapes(const nlohmann::json& shapes) {
    Mlp net;
    for (const auto& s : shapes) {
        DenseLayer l;
        l.in = s.at("in").get<std::size_t>();
        l.out = s.at("out").get<std::size_t>();
        l.act = static_cast<Activation>(s.at("act").get<int>());
        l.w.assign(l.in * l.out, 0.0);
        l.b.assign(l.out, 0.0);
        net.layers.push_back(std::move(l));
    }
    return net;
}

}  // namespace

void save_checkpoint(std::ostream& out, const TrainState& state, Seed seed) {
    nlohmann::json header = {
        {"format", "xsdist-checkpoint-v1"},
        {"encoder", mlp_shapes(state.encoder)},
        {"decoder", mlp_shapes(state.decoder)},
        {"lambda", state.lambda},
        {"step", state.step},
        {"seed", seed.value},
        {"stream", seed.stream_id},
    };
    out << header.dump() << "\n";
    for (const auto& l : state.encoder.layers) write_layer_csv(out, l);
    for (const auto& l : state.decoder.layers) write_layer_csv(out, l);
}

void save_checkpoint_file(const std::string& path, const TrainState& state, Seed seed) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    save_checkpoint(out, state, seed);
}

TrainState load_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("checkpoint: empty file");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(std::string("checkpoint: bad header: ") + e.what());
    }
    TrainState state;
    state.encoder = mlp_from_shapes(header.at("encoder"));
    state.decoder = mlp_from_shapes(header.at("decoder"));
    state.lambda = header.at("lambda").get<double>();
    state.step = header.at("step").get<long>();
    for (auto& l : state.encoder.layers) read_layer_csv(in, l);
    for (auto& l : state.decoder.layers) read_layer_csv(in, l);
    state.adam_m.assign(state.parameter_count(), 0.0);
    state.adam_v.assign(state.parameter_count(), 0.0);
    return state;
}

TrainState load_checkpoint_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return load_checkpoint(in);
}

void write_epoch_log_csv(std::ostream& out, const std::vector<EpochLog>& logs) {
    out << "step,loss_rec,loss_lat,loss_global\n";
    for (const auto& log : logs)
        out << log.step << ',' << format17(log.loss_rec) << ',' << format17(log.loss_lat)
            << ',' << format17(log.loss_global) << "\n";
}

}  // namespace xsdist
