#include "gst/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace gst {

namespace {

void add_row_bias(Matrix& m, const std::vector<double>& b) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) r[j] += b[j];
    }
}

std::vector<double> column_sums(const Matrix& m) {
    std::vector<double> s(m.cols(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* r = m.row(i);
        for (std::size_t j = 0; j < m.cols(); ++j) s[j] += r[j];
    }
    return s;
}

struct ForwardCache {
    Matrix z1;       // pre-activation hidden
    Matrix hidden;   // after ReLU (+ dropout in train mode)
    Matrix logits;   // n x C
    std::vector<std::uint8_t> mask;  // dropout keep mask, train mode only
};

// One shared forward path: logits = A~ (hidden W2) + b2,
// hidden = dropout(ReLU(A~ (X W1) + b1)).
ForwardCache forward_cache(const GcnModel& model, const NormalizedAdjacency& adj,
                           const Matrix& x, bool train_mode, Rng* rng) {
    if (adj.mode != NormMode::symmetric)
        throw std::invalid_argument("GCN forward expects a symmetric-normalized adjacency");
    if (x.rows() != adj.n_nodes || x.cols() != model.in_dim())
        throw std::invalid_argument("GCN forward: feature shape mismatch");

    ForwardCache f;
    Matrix xw = matmul(x, model.w1);
    f.z1 = adj.multiply(xw);
    add_row_bias(f.z1, model.b1);

    f.hidden = f.z1;
    double* h = f.hidden.data();
    for (std::size_t i = 0; i < f.hidden.size(); ++i) h[i] = std::max(0.0, h[i]);

    if (train_mode && model.dropout_rate > 0.0) {
        const double keep = 1.0 - model.dropout_rate;
        const double scale = 1.0 / keep;
        f.mask.resize(f.hidden.size());
        for (std::size_t i = 0; i < f.hidden.size(); ++i) {
            f.mask[i] = uniform_real(*rng) < keep ? 1 : 0;
            h[i] = f.mask[i] ? h[i] * scale : 0.0;
        }
    }

    Matrix hw = matmul(f.hidden, model.w2);
    f.logits = adj.multiply(hw);
    add_row_bias(f.logits, model.b2);
    return f;
}

double param_sq_norm(const GcnModel& m) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.w1.size(); ++i) s += m.w1.data()[i] * m.w1.data()[i];
    for (double v : m.b1) s += v * v;
    for (std::size_t i = 0; i < m.w2.size(); ++i) s += m.w2.data()[i] * m.w2.data()[i];
    for (double v : m.b2) s += v * v;
    return s;
}

double cross_entropy(const Matrix& logits, const LabeledNodes& labels) {
    double loss = 0.0;
    for (auto [node, y] : labels) {
        const double* z = logits.row(static_cast<std::size_t>(node));
        loss += log_sum_exp(z, logits.cols()) - z[static_cast<std::size_t>(y)];
    }
    return loss / static_cast<double>(labels.size());
}

// Gradients of cross_entropy + (wd/2)||theta||^2 through the cached forward.
GcnGradients backward(const GcnModel& model, const NormalizedAdjacency& adj, const Matrix& x,
                      const ForwardCache& f, const LabeledNodes& labels, double weight_decay) {
    const std::size_t n = adj.n_nodes, c = model.out_dim();
    const double inv = 1.0 / static_cast<double>(labels.size());

    Matrix dz2(n, c);
    for (auto [node, y] : labels) {
        const auto i = static_cast<std::size_t>(node);
        const double* z = f.logits.row(i);
        double* g = dz2.row(i);
        const double lse = log_sum_exp(z, c);
        for (std::size_t j = 0; j < c; ++j) g[j] = std::exp(z[j] - lse) * inv;
        g[static_cast<std::size_t>(y)] -= inv;
    }

    GcnGradients grads;
    Matrix g2 = adj.multiply(dz2);  // A~ is symmetric, so A~^T = A~
    grads.w2 = matmul_at_b(f.hidden, g2);
    grads.b2 = column_sums(dz2);

    Matrix dhidden = matmul_a_bt(g2, model.w2);
    const double keep = 1.0 - model.dropout_rate;
    const bool dropped = !f.mask.empty();
    double* dh = dhidden.data();
    const double* z1 = f.z1.data();
    for (std::size_t i = 0; i < dhidden.size(); ++i) {
        if (dropped) dh[i] = f.mask[i] ? dh[i] / keep : 0.0;
        if (z1[i] <= 0.0) dh[i] = 0.0;
    }

    Matrix g1 = adj.multiply(dhidden);
    grads.w1 = matmul_at_b(x, g1);
    grads.b1 = column_sums(dhidden);

    if (weight_decay != 0.0) {
        for (std::size_t i = 0; i < grads.w1.size(); ++i) grads.w1.data()[i] += weight_decay * model.w1.data()[i];
        for (std::size_t i = 0; i < grads.w2.size(); ++i) grads.w2.data()[i] += weight_decay * model.w2.data()[i];
        for (std::size_t j = 0; j < grads.b1.size(); ++j) grads.b1[j] += weight_decay * model.b1[j];
        for (std::size_t j = 0; j < grads.b2.size(); ++j) grads.b2[j] += weight_decay * model.b2[j];
    }
    return grads;
}

struct AdamState {
    std::vector<double> m, v;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_step(double* theta, const double* grad, AdamState& st, std::size_t n, double lr,
               int t) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double bc1 = 1.0 - std::pow(beta1, t);
    const double bc2 = 1.0 - std::pow(beta2, t);
    for (std::size_t i = 0; i < n; ++i) {
        st.m[i] = beta1 * st.m[i] + (1.0 - beta1) * grad[i];
        st.v[i] = beta2 * st.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        theta[i] -= lr * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + eps);
    }
}

}  // namespace

GcnModel init_model(std::size_t in_dim, std::size_t hidden_dim, std::size_t out_dim,
                    std::uint64_t seed, double dropout_rate) {
    if (in_dim < 1 || hidden_dim < 1 || out_dim < 1)
        throw std::invalid_argument("model dimensions must be >= 1");
    GcnModel m;
    m.dropout_rate = dropout_rate;
    m.seed = seed;
    m.w1 = Matrix(in_dim, hidden_dim);
    m.w2 = Matrix(hidden_dim, out_dim);
    m.b1.assign(hidden_dim, 0.0);
    m.b2.assign(out_dim, 0.0);

    Rng rng = make_rng(seed);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(in_dim + hidden_dim));
    for (std::size_t i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = uniform_real(rng, -lim1, lim1);
    const double lim2 = std::sqrt(6.0 / static_cast<double>(hidden_dim + out_dim));
    for (std::size_t i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = uniform_real(rng, -lim2, lim2);
    return m;
}

Matrix forward(const GcnModel& model, const NormalizedAdjacency& adj_sym, const Matrix& x,
               bool train_mode, Rng* dropout_rng) {
    Rng local = make_rng(hash_seed(model.seed, 0x6d61736bULL));
    Rng* rng = dropout_rng ? dropout_rng : &local;
    return forward_cache(model, adj_sym, x, train_mode, rng).logits;
}

Matrix predict_proba(const GcnModel& model, const NormalizedAdjacency& adj_sym, const Matrix& x) {
    return softmax_rows(forward(model, adj_sym, x, false));
}

std::vector<int> argmax_labels(const Matrix& m) {
    std::vector<int> out(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i)
        out[i] = static_cast<int>(argmax_row(m.row(i), m.cols()));
    return out;
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels,
                const std::vector<NodeId>& node_set) {
    if (node_set.empty()) throw std::invalid_argument("accuracy over an empty node set");
    std::size_t hits = 0;
    for (NodeId v : node_set)
        if (predictions[static_cast<std::size_t>(v)] == labels[static_cast<std::size_t>(v)]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(node_set.size());
}

double gcn_loss(const GcnModel& model, const NormalizedAdjacency& adj_sym, const Matrix& x,
                const LabeledNodes& training_labels, double weight_decay) {
    if (training_labels.empty()) throw std::invalid_argument("loss over an empty label set");
    Rng unused = make_rng(0);
    const auto f = forward_cache(model, adj_sym, x, false, &unused);
    return cross_entropy(f.logits, training_labels) + 0.5 * weight_decay * param_sq_norm(model);
}

GcnGradients gcn_loss_grad(const GcnModel& model, const NormalizedAdjacency& adj_sym,
                           const Matrix& x, const LabeledNodes& training_labels,
                           double weight_decay, double* loss_out) {
    if (training_labels.empty()) throw std::invalid_argument("loss over an empty label set");
    Rng unused = make_rng(0);
    const auto f = forward_cache(model, adj_sym, x, false, &unused);
    if (loss_out)
        *loss_out = cross_entropy(f.logits, training_labels) + 0.5 * weight_decay * param_sq_norm(model);
    return backward(model, adj_sym, x, f, training_labels, weight_decay);
}

TrainResult train(GcnModel model, const NormalizedAdjacency& adj_sym, const Matrix& x,
                  const LabeledNodes& training_labels, const LabeledNodes& val,
                  const TrainConfig& config) {
    if (training_labels.empty()) throw std::invalid_argument("train: no training labels");
    if (config.patience > config.max_epochs) throw std::invalid_argument("train: patience > max_epochs");
    if (val.empty() && config.patience > 0)
        throw std::invalid_argument("train: early stopping requested with an empty validation set");

    Rng dropout_rng = make_rng(hash_seed(config.seed, 0x64726f70ULL));

    AdamState aw1(model.w1.size()), ab1(model.b1.size());
    AdamState aw2(model.w2.size()), ab2(model.b2.size());

    std::vector<NodeId> val_ids(val.size());
    std::vector<int> val_labels_dense;
    if (!val.empty()) {
        val_labels_dense.assign(adj_sym.n_nodes, -1);
        for (std::size_t i = 0; i < val.size(); ++i) {
            val_ids[i] = val[i].first;
            val_labels_dense[static_cast<std::size_t>(val[i].first)] = val[i].second;
        }
    }

    TrainResult res;
    res.model = model;
    double best_acc = -1.0;
    int since_best = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto f = forward_cache(model, adj_sym, x, true, &dropout_rng);
        const double loss =
            cross_entropy(f.logits, training_labels) + 0.5 * config.weight_decay * param_sq_norm(model);
        if (!std::isfinite(loss))
            throw std::runtime_error("training diverged: non-finite loss at epoch " + std::to_string(epoch));

        const auto grads = backward(model, adj_sym, x, f, training_labels, config.weight_decay);
        const int t = epoch + 1;
        adam_step(model.w1.data(), grads.w1.data(), aw1, model.w1.size(), config.learning_rate, t);
        adam_step(model.b1.data(), grads.b1.data(), ab1, model.b1.size(), config.learning_rate, t);
        adam_step(model.w2.data(), grads.w2.data(), aw2, model.w2.size(), config.learning_rate, t);
        adam_step(model.b2.data(), grads.b2.data(), ab2, model.b2.size(), config.learning_rate, t);

        double val_acc = 0.0;
        if (!val.empty()) {
            const Matrix logits = forward(model, adj_sym, x, false);
            const auto preds = argmax_labels(logits);
            val_acc = accuracy(preds, val_labels_dense, val_ids);
        }
        res.history.push_back(EpochRecord{epoch, loss, val_acc});

        if (val.empty() || val_acc > best_acc) {
            best_acc = val_acc;
            res.model = model;
            res.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= config.patience && config.patience > 0) {
            break;
        }
    }
    res.best_val_acc = std::max(best_acc, 0.0);
    if (val.empty()) res.model = model;  // no selection signal; keep the final parameters
    return res;
}

void save_checkpoint(const GcnModel& model, const std::filesystem::path& path) {
    nlohmann::json header = {{"in_dim", model.in_dim()},
                             {"hidden_dim", model.hidden_dim()},
                             {"out_dim", model.out_dim()},
                             {"dropout_rate", model.dropout_rate},
                             {"seed", model.seed}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
    const std::string h = header.dump();
    out << h << "\n";
    auto dump = [&](const double* p, std::size_t n) {
        out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    };
    dump(model.w1.data(), model.w1.size());
    dump(model.b1.data(), model.b1.size());
    dump(model.w2.data(), model.w2.size());
    dump(model.b2.data(), model.b2.size());
}

GcnModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
    std::string line;
    std::getline(in, line);
    const auto header = nlohmann::json::parse(line);
    GcnModel m;
    const auto d = header.at("in_dim").get<std::size_t>();
    const auto h = header.at("hidden_dim").get<std::size_t>();
    const auto c = header.at("out_dim").get<std::size_t>();
    m.dropout_rate = header.at("dropout_rate").get<double>();
    m.seed = header.at("seed").get<std::uint64_t>();
    m.w1 = Matrix(d, h);
    m.b1.resize(h);
    m.w2 = Matrix(h, c);
    m.b2.resize(c);
    auto slurp = [&](double* p, std::size_t n) {
        in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
    };
    slurp(m.w1.data(), m.w1.size());
    slurp(m.b1.data(), m.b1.size());
    slurp(m.w2.data(), m.w2.size());
    slurp(m.b2.data(), m.b2.size());
    return m;
}

void save_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write history: " + path.string());
    out << "epoch,train_loss,val_acc\n";
    char buf[96];
    for (const auto& e : history) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", e.epoch, e.train_loss, e.val_acc);
        out << buf;
    }
}

}  // namespace gst
