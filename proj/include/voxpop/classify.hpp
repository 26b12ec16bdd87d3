#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "voxpop/core.hpp"
#include "voxpop/csv.hpp"
#include "voxpop/hashnet.hpp"
#include "voxpop/ingest.hpp"

namespace voxpop::classify {

struct LabeledTweet {
    ingest::CleanTweet tweet;
    Camp label;
};

// Sparse bag-of-words over a frozen vocabulary. Out-of-vocabulary tokens are
// dropped at inference time.
struct FeatureVector {
    std::vector<std::pair<uint32_t, double>> counts;  // (token id, count), ids ascending
};

struct Vocabulary {
    std::vector<std::string> tokens;                  // sorted, defines token ids
    std::unordered_map<std::string, uint32_t> index;

    static Vocabulary build(const std::vector<LabeledTweet>& tweets) {
        std::map<std::string, uint32_t> seen;
        for (const auto& t : tweets)
            for (const auto& tok : t.tweet.tokens) seen.emplace(tok, 0);
        Vocabulary v;
        v.tokens.reserve(seen.size());
        for (const auto& [tok, _] : seen) {
            v.index.emplace(tok, uint32_t(v.tokens.size()));
            v.tokens.push_back(tok);
        }
        return v;
    }

    FeatureVector featurize(const std::vector<std::string>& tokens) const {
        std::map<uint32_t, double> acc;
        for (const auto& tok : tokens) {
            const auto it = index.find(tok);
            if (it != index.end()) acc[it->second] += 1.0;
        }
        FeatureVector f;
        f.counts.assign(acc.begin(), acc.end());
        return f;
    }
};

// --- training-set construction -------------------------------------------------

struct TrainingSplit {
    std::vector<LabeledTweet> train;   // F/M only
    std::vector<LabeledTweet> test;    // F/M only
    std::vector<LabeledTweet> third;   // T-labeled, set aside
};

// Labels a tweet by its seed hashtags when they all agree on one camp.
inline std::optional<Camp> seed_label(const ingest::CleanTweet& t,
                                      const hashnet::HashtagSeedLabels& seeds) {
    std::optional<Camp> label;
    for (const auto& h : t.hashtags) {
        const auto it = seeds.camps.find(h);
        if (it == seeds.camps.end()) continue;
        if (label && *label != it->second) return std::nullopt;  // conflicting seeds
        label = it->second;
    }
    return label;
}

// Tweets strictly before cutoff_day that carry agreeing seed hashtags become
// the labeled pool; a seeded 90/10 shuffle makes the split reproducible.
inline TrainingSplit build_training_set(const std::vector<ingest::CleanTweet>& tweets,
                                        const hashnet::HashtagSeedLabels& seeds, Date cutoff_day,
                                        uint64_t rng_seed, double train_fraction = 0.9) {
    std::vector<LabeledTweet> labeled;
    TrainingSplit split;
    for (const auto& t : tweets) {
        if (t.day >= cutoff_day) continue;
        const auto label = seed_label(t, seeds);
        if (!label) continue;
        if (*label == Camp::T) split.third.push_back({t, *label});
        else labeled.push_back({t, *label});
    }
    if (labeled.empty()) throw ConfigError("build_training_set: no labeled tweets before cutoff");
    std::mt19937_64 rng(rng_seed);
    std::shuffle(labeled.begin(), labeled.end(), rng);
    const size_t n_train = size_t(std::llround(train_fraction * double(labeled.size())));
    split.train.assign(labeled.begin(), labeled.begin() + n_train);
    split.test.assign(labeled.begin() + n_train, labeled.end());
    return split;
}

// --- logistic regression ---------------------------------------------------------

// p -> 1 means the tweet supports Macri, p -> 0 Fernandez.
struct StanceModel {
    Vocabulary vocab;
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 1e-4;
    double threshold_low = 0.33;   // p <= low  => FF
    double threshold_high = 0.66;  // p >= high => MP

    double score(const FeatureVector& f) const {  // the linear logit, bias included
        double z = bias;
        for (const auto& [id, c] : f.counts) z += weights[id] * c;
        return z;
    }
    double probability(const FeatureVector& f) const { return sigmoid(score(f)); }
    double probability(const std::vector<std::string>& tokens) const {
        return probability(vocab.featurize(tokens));
    }

    static double sigmoid(double z) {
        return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    }
};

struct TrainOptions {
    double lambda = 1e-4;
    unsigned epochs = 20;
    unsigned batch_size = 256;
    double learning_rate = 0.1;  // decays as rate/sqrt(step)
    uint64_t rng_seed = 12345;
};

namespace detail {
inline double label_y(Camp c) { return c == Camp::M ? 1.0 : 0.0; }

// softplus(z) = log(1+e^z) without overflow
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
}  // namespace detail

// Full-batch L2-regularized negative log-likelihood; the quantity the
// optimizer descends and the finite-difference tests probe.
inline double lr_loss(const std::vector<double>& weights, double bias,
                      const std::vector<FeatureVector>& xs, const std::vector<double>& ys,
                      double lambda) {
    double loss = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double z = bias;
        for (const auto& [id, c] : xs[i].counts) z += weights[id] * c;
        loss += detail::softplus(z) - ys[i] * z;
    }
    double reg = 0.0;
    for (const double w : weights) reg += w * w;
    return loss + 0.5 * lambda * reg;
}

// Analytic gradient of lr_loss; bias is not regularized.
inline void lr_gradient(const std::vector<double>& weights, double bias,
                        const std::vector<FeatureVector>& xs, const std::vector<double>& ys,
                        double lambda, std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(weights.size(), 0.0);
    grad_b = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double z = bias;
        for (const auto& [id, c] : xs[i].counts) z += weights[id] * c;
        const double r = StanceModel::sigmoid(z) - ys[i];
        for (const auto& [id, c] : xs[i].counts) grad_w[id] += r * c;
        grad_b += r;
    }
    for (size_t j = 0; j < weights.size(); ++j) grad_w[j] += lambda * weights[j];
}

// Deterministic mini-batch gradient descent. Same seed + same data gives a
// bit-identical model.
inline StanceModel train_lr(const std::vector<LabeledTweet>& train, const TrainOptions& opt = {}) {
    bool has_f = false, has_m = false;
    for (const auto& t : train) (t.label == Camp::M ? has_m : has_f) = true;
    if (!has_f || !has_m) throw DataError("train_lr: training set must contain both F and M labels");

    StanceModel model;
    model.vocab = Vocabulary::build(train);
    model.weights.assign(model.vocab.tokens.size(), 0.0);
    model.lambda = opt.lambda;

    std::vector<FeatureVector> xs(train.size());
    std::vector<double> ys(train.size());
    for (size_t i = 0; i < train.size(); ++i) {
        xs[i] = model.vocab.featurize(train[i].tweet.tokens);
        ys[i] = detail::label_y(train[i].label);
    }

    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::mt19937_64 rng(opt.rng_seed);
    uint64_t step = 0;
    for (unsigned epoch = 0; epoch < opt.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (size_t begin = 0; begin < order.size(); begin += opt.batch_size) {
            const size_t end = std::min(order.size(), begin + opt.batch_size);
            const double inv_n = 1.0 / double(end - begin);
            const double eta = opt.learning_rate / std::sqrt(double(++step));
            // accumulate sparse batch gradient
            std::map<uint32_t, double> gw;
            double gb = 0.0;
            for (size_t idx = begin; idx < end; ++idx) {
                const size_t i = order[idx];
                double z = model.bias;
                for (const auto& [id, c] : xs[i].counts) z += model.weights[id] * c;
                const double r = StanceModel::sigmoid(z) - ys[i];
                for (const auto& [id, c] : xs[i].counts) gw[id] += r * c;
                gb += r;
            }
            // L2 shrinkage applies to every weight, touched or not
            const double shrink = 1.0 - eta * opt.lambda;
            for (double& w : model.weights) w *= shrink;
            for (const auto& [id, g] : gw) model.weights[id] -= eta * g * inv_n;
            model.bias -= eta * gb * inv_n;
        }
    }
    return model;
}

// --- multinomial Naive Bayes baseline -------------------------------------------

struct NaiveBayesModel {
    Vocabulary vocab;
    double log_prior_m = 0.0, log_prior_f = 0.0;
    std::vector<double> log_theta_m, log_theta_f;  // add-one smoothed token log-probs

    double log_odds_m(const FeatureVector& f) const {
        double lm = log_prior_m, lf = log_prior_f;
        for (const auto& [id, c] : f.counts) {
            lm += c * log_theta_m[id];
            lf += c * log_theta_f[id];
        }
        return lm - lf;
    }
    Camp predict(const std::vector<std::string>& tokens) const {
        return log_odds_m(vocab.featurize(tokens)) >= 0 ? Camp::M : Camp::F;
    }
};

inline NaiveBayesModel train_nb(const std::vector<LabeledTweet>& train) {
    bool has_f = false, has_m = false;
    for (const auto& t : train) (t.label == Camp::M ? has_m : has_f) = true;
    if (!has_f || !has_m) throw DataError("train_nb: training set must contain both F and M labels");

    NaiveBayesModel model;
    model.vocab = Vocabulary::build(train);
    const size_t v = model.vocab.tokens.size();
    std::vector<double> count_m(v, 0.0), count_f(v, 0.0);
    double total_m = 0, total_f = 0, docs_m = 0, docs_f = 0;
    for (const auto& t : train) {
        auto& counts = t.label == Camp::M ? count_m : count_f;
        auto& total = t.label == Camp::M ? total_m : total_f;
        auto& docs = t.label == Camp::M ? docs_m : docs_f;
        ++docs;
        for (const auto& tok : t.tweet.tokens) {
            counts[model.vocab.index.at(tok)] += 1.0;
            total += 1.0;
        }
    }
    model.log_prior_m = std::log(docs_m / (docs_m + docs_f));
    model.log_prior_f = std::log(docs_f / (docs_m + docs_f));
    model.log_theta_m.resize(v);
    model.log_theta_f.resize(v);
    for (size_t j = 0; j < v; ++j) {
        model.log_theta_m[j] = std::log((count_m[j] + 1.0) / (total_m + double(v)));
        model.log_theta_f[j] = std::log((count_f[j] + 1.0) / (total_f + double(v)));
    }
    return model;
}

// --- evaluation -------------------------------------------------------------------

struct EvalMetrics {
    // index 0 = F, 1 = M
    double precision[2] = {0, 0};
    double recall[2] = {0, 0};
    double f1[2] = {0, 0};
    double accuracy = 0.0;
    uint64_t confusion[2][2] = {{0, 0}, {0, 0}};  // [truth][predicted]

    nlohmann::json to_json() const {
        return {{"precision_ff", precision[0]}, {"recall_ff", recall[0]}, {"f1_ff", f1[0]},
                {"precision_mp", precision[1]}, {"recall_mp", recall[1]}, {"f1_mp", f1[1]},
                {"accuracy", accuracy},
                {"confusion", {{"ff_ff", confusion[0][0]}, {"ff_mp", confusion[0][1]},
                               {"mp_ff", confusion[1][0]}, {"mp_mp", confusion[1][1]}}}};
    }
};

// Metrics from (truth, predicted) camp pairs; evaluation is plain argmax with
// no unclassified band, as in a standard two-class report.
inline EvalMetrics compute_metrics(const std::vector<std::pair<Camp, Camp>>& pairs) {
    if (pairs.empty()) throw DataError("compute_metrics: empty test set");
    EvalMetrics m;
    for (const auto& [truth, pred] : pairs)
        ++m.confusion[truth == Camp::M ? 1 : 0][pred == Camp::M ? 1 : 0];
    for (int c = 0; c < 2; ++c) {
        const double tp = double(m.confusion[c][c]);
        const double fp = double(m.confusion[1 - c][c]);
        const double fn = double(m.confusion[c][1 - c]);
        m.precision[c] = tp + fp > 0 ? tp / (tp + fp) : 0.0;
        m.recall[c] = tp + fn > 0 ? tp / (tp + fn) : 0.0;
        m.f1[c] = m.precision[c] + m.recall[c] > 0
                      ? 2 * m.precision[c] * m.recall[c] / (m.precision[c] + m.recall[c])
                      : 0.0;
    }
    m.accuracy = double(m.confusion[0][0] + m.confusion[1][1]) / double(pairs.size());
    return m;
}

inline EvalMetrics evaluate(const StanceModel& model, const std::vector<LabeledTweet>& test) {
    std::vector<std::pair<Camp, Camp>> pairs;
    pairs.reserve(test.size());
    for (const auto& t : test)
        pairs.emplace_back(t.label, model.probability(t.tweet.tokens) >= 0.5 ? Camp::M : Camp::F);
    return compute_metrics(pairs);
}

inline EvalMetrics evaluate_nb(const NaiveBayesModel& model, const std::vector<LabeledTweet>& test) {
    std::vector<std::pair<Camp, Camp>> pairs;
    pairs.reserve(test.size());
    for (const auto& t : test) pairs.emplace_back(t.label, model.predict(t.tweet.tokens));
    return compute_metrics(pairs);
}

// --- tweet-level stance -----------------------------------------------------------

struct TweetStance {
    Stance stance = Stance::Unclassified;
    std::optional<double> p;  // present iff the model produced the stance
};

// Seed hashtags that are all pro-Third bypass the model; otherwise the model
// probability and the 0.33/0.66 band decide. Both boundaries are inclusive.
inline TweetStance classify_tweet(const StanceModel& model, const ingest::CleanTweet& tweet,
                                  const hashnet::HashtagSeedLabels& seeds) {
    bool any_seed = false, all_third = true;
    for (const auto& h : tweet.hashtags) {
        const auto it = seeds.camps.find(h);
        if (it == seeds.camps.end()) continue;
        any_seed = true;
        if (it->second != Camp::T) all_third = false;
    }
    if (any_seed && all_third) return {Stance::TP, std::nullopt};
    const double p = model.probability(tweet.tokens);
    if (p <= model.threshold_low) return {Stance::FF, p};
    if (p >= model.threshold_high) return {Stance::MP, p};
    return {Stance::Unclassified, p};
}

// Inference is pure per tweet; slots are preallocated so sharding by index is
// deterministic for any thread count.
inline std::vector<TweetStance> classify_corpus(const StanceModel& model,
                                                const std::vector<ingest::CleanTweet>& tweets,
                                                const hashnet::HashtagSeedLabels& seeds,
                                                unsigned threads = 1) {
    std::vector<TweetStance> out(tweets.size());
    const auto run = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) out[i] = classify_tweet(model, tweets[i], seeds);
    };
    if (threads <= 1 || tweets.size() < 1024) {
        run(0, tweets.size());
    } else {
        std::vector<std::thread> pool;
        const size_t chunk = (tweets.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const size_t b = std::min(tweets.size(), t * chunk);
            const size_t e = std::min(tweets.size(), b + chunk);
            if (b < e) pool.emplace_back(run, b, e);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

// --- model and stance artifacts -----------------------------------------------------

inline nlohmann::json model_to_json(const StanceModel& m) {
    return {{"schema_version", 1},
            {"type", "logistic_regression"},
            {"vocabulary", m.vocab.tokens},
            {"weights", m.weights},
            {"bias", m.bias},
            {"lambda", m.lambda},
            {"threshold_low", m.threshold_low},
            {"threshold_high", m.threshold_high}};
}

inline StanceModel model_from_json(const nlohmann::json& j) {
    StanceModel m;
    if (j.value("schema_version", 0) != 1) throw DataError("model file: unsupported schema_version");
    m.vocab.tokens = j.at("vocabulary").get<std::vector<std::string>>();
    for (uint32_t i = 0; i < m.vocab.tokens.size(); ++i) m.vocab.index.emplace(m.vocab.tokens[i], i);
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != m.vocab.tokens.size())
        throw DataError("model file: weights/vocabulary size mismatch");
    m.bias = j.at("bias").get<double>();
    m.lambda = j.at("lambda").get<double>();
    m.threshold_low = j.at("threshold_low").get<double>();
    m.threshold_high = j.at("threshold_high").get<double>();
    if (!(m.threshold_low < m.threshold_high)) throw DataError("model file: thresholds out of order");
    return m;
}

struct StanceRecord {
    std::string tweet_id;
    std::string user_id;
    Date day;
    Stance stance = Stance::Unclassified;
    std::optional<double> p;
};

inline std::string stances_to_csv(const std::vector<ingest::CleanTweet>& tweets,
                                  const std::vector<TweetStance>& stances) {
    std::string out = "tweet_id,user_id,day,stance,p\n";
    for (size_t i = 0; i < tweets.size(); ++i) {
        out += tweets[i].tweet_id + "," + tweets[i].user_id + "," + tweets[i].day.str() + "," +
               to_string(stances[i].stance) + "," +
               (stances[i].p ? csv::fmt(*stances[i].p, 6) : "") + "\n";
    }
    return out;
}

inline std::vector<StanceRecord> load_stances_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    std::vector<StanceRecord> out;
    for (const auto& row : rows) {
        if (row.size() < 5) throw DataError("stance csv: bad row in " + path);
        if (row[0] == "tweet_id") continue;
        StanceRecord r;
        r.tweet_id = row[0];
        r.user_id = row[1];
        const auto d = Date::parse(row[2]);
        if (!d) throw DataError("stance csv: bad date " + row[2]);
        r.day = *d;
        const auto s = parse_stance(row[3]);
        if (!s) throw DataError("stance csv: bad stance " + row[3]);
        r.stance = *s;
        if (!row[4].empty()) r.p = std::stod(row[4]);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace voxpop::classify
