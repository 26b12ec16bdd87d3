#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "voxpop/core.hpp"
#include "voxpop/csv.hpp"
#include "voxpop/ingest.hpp"

namespace voxpop::hashnet {

// --- co-occurrence counting ----------------------------------------------------

struct CooccurrenceCounts {
    uint64_t total_tweets = 0;                       // the null model's N
    std::map<std::string, uint64_t> occurrences;     // c_i: tweets containing hashtag i
    std::map<std::pair<std::string, std::string>, uint64_t> pairs;  // k_ij, key ordered i<j
};

// Counts hashtag occurrences and co-occurrences, one per tweet regardless of
// repetition within the tweet. When count_all_tweets is true (default), N is
// the number of tweets processed, with or without hashtags; the alternative
// counts only hashtag-bearing tweets and shifts every p-value.
inline CooccurrenceCounts count_cooccurrences(const std::vector<ingest::CleanTweet>& tweets,
                                              bool count_all_tweets = true) {
    CooccurrenceCounts counts;
    for (const auto& t : tweets) {
        std::vector<std::string> tags(t.hashtags);
        std::sort(tags.begin(), tags.end());
        tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
        if (count_all_tweets || !tags.empty()) ++counts.total_tweets;
        for (const auto& h : tags) ++counts.occurrences[h];
        for (size_t a = 0; a < tags.size(); ++a)
            for (size_t b = a + 1; b < tags.size(); ++b)
                ++counts.pairs[{tags[a], tags[b]}];
    }
    return counts;
}

// --- exact hypergeometric tail --------------------------------------------------

inline double log_choose(uint64_t n, uint64_t k) {
    if (k > n) return -std::numeric_limits<double>::infinity();
    return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
           std::lgamma(double(n - k) + 1.0);
}

// P[X >= k] for X ~ Hypergeometric(population N, c_i marked, c_j drawn).
// Computed as a log-space tail sum so it stays finite at N ~ 1e8.
inline double edge_pvalue(uint64_t k, uint64_t c_i, uint64_t c_j, uint64_t N) {
    if (c_i < 1 || c_j < 1 || c_i > N || c_j > N || k > std::min(c_i, c_j))
        throw std::domain_error("edge_pvalue: need 0 <= k <= min(c_i,c_j) <= N, c_i,c_j >= 1");
    const uint64_t lo = (c_i + c_j > N) ? c_i + c_j - N : 0;  // support lower bound
    if (k <= lo) return 1.0;
    const uint64_t hi = std::min(c_i, c_j);
    const double log_denom = log_choose(N, c_j);
    // log pmf(x), collected then combined with log-sum-exp
    std::vector<double> log_terms;
    log_terms.reserve(hi - k + 1);
    double max_log = -std::numeric_limits<double>::infinity();
    for (uint64_t x = k; x <= hi; ++x) {
        const double lt = log_choose(c_i, x) + log_choose(N - c_i, c_j - x) - log_denom;
        log_terms.push_back(lt);
        max_log = std::max(max_log, lt);
    }
    if (!std::isfinite(max_log)) return 0.0;
    long double sum = 0.0L;
    for (const double lt : log_terms) sum += std::exp((long double)(lt - max_log));
    const long double p = std::exp((long double)max_log) * sum;
    return std::min(1.0, (double)p);
}

// --- validated network -----------------------------------------------------------

struct ValidatedEdge {
    std::string a, b;   // a < b
    uint64_t k = 0;
    double p = 1.0;
};

struct ValidatedHashtagNetwork {
    double threshold = 1e-7;
    std::map<std::string, uint64_t> vertices;  // every hashtag with its occurrence count
    std::vector<ValidatedEdge> edges;          // only p < threshold survives

    std::vector<std::string> neighbors(const std::string& v) const {
        std::vector<std::string> out;
        for (const auto& e : edges) {
            if (e.a == v) out.push_back(e.b);
            else if (e.b == v) out.push_back(e.a);
        }
        return out;
    }
};

// Keeps co-occurrence edges whose tail probability beats the cutoff. The edge
// p-values are independent of each other, so the work is sharded by index
// when threads > 1; results land in preallocated slots and stay deterministic.
inline ValidatedHashtagNetwork validate_network(const CooccurrenceCounts& counts,
                                                double threshold = 1e-7, unsigned threads = 1) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw std::domain_error("validate_network: threshold must be in (0,1]");
    ValidatedHashtagNetwork net;
    net.threshold = threshold;
    net.vertices = counts.occurrences;

    struct PairRef {
        const std::pair<std::string, std::string>* key;
        uint64_t k;
        double p;
    };
    std::vector<PairRef> work;
    work.reserve(counts.pairs.size());
    for (const auto& [key, k] : counts.pairs) work.push_back({&key, k, 1.0});

    const auto compute = [&](size_t begin, size_t end) {
        for (size_t i = begin; i < end; ++i) {
            const auto& [a, b] = *work[i].key;
            work[i].p = edge_pvalue(work[i].k, counts.occurrences.at(a), counts.occurrences.at(b),
                                    counts.total_tweets);
        }
    };
    if (threads <= 1 || work.size() < 256) {
        compute(0, work.size());
    } else {
        std::vector<std::thread> pool;
        const size_t chunk = (work.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const size_t b = std::min(work.size(), t * chunk);
            const size_t e = std::min(work.size(), b + chunk);
            if (b < e) pool.emplace_back(compute, b, e);
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& w : work)
        if (w.p < threshold) net.edges.push_back({w.key->first, w.key->second, w.k, w.p});
    return net;
}

// --- seed labels and QA -----------------------------------------------------------

struct HashtagSeedLabels {
    std::map<std::string, Camp> camps;

    // CSV `hashtag,camp`; a leading header row is skipped if present.
    static HashtagSeedLabels load(const std::string& path) {
        HashtagSeedLabels seeds;
        for (const auto& row : csv::read_file(path)) {
            if (row.size() < 2) throw DataError("seed labels: expected hashtag,camp in " + path);
            if (row[0] == "hashtag") continue;
            const auto camp = parse_camp(row[1]);
            if (!camp) throw DataError("seed labels: unknown camp '" + row[1] + "' in " + path);
            std::string tag = text::normalize(row[0]);
            if (!tag.empty() && tag[0] == '#') tag.erase(0, 1);
            seeds.camps[tag] = *camp;
        }
        return seeds;
    }
};

struct CrossCampEdge {
    std::string a, b;
    Camp camp_a, camp_b;
    double p;
};

struct LabelConsistencyReport {
    std::vector<CrossCampEdge> cross_edges;
    uint64_t labeled_edges = 0;        // validated edges with both endpoints seeded
    double cross_fraction = 0.0;       // cross-camp share of labeled edges
    // hashtags ranked by number of incident cross-camp edges, worst first
    std::vector<std::pair<std::string, uint64_t>> suspects;

    std::string to_csv() const {
        std::string out = "hashtag_i,camp_i,hashtag_j,camp_j,p\n";
        for (const auto& e : cross_edges)
            out += e.a + "," + to_string(e.camp_a) + "," + e.b + "," + to_string(e.camp_b) + "," +
                   csv::fmt_g(e.p) + "\n";
        return out;
    }
};

inline LabelConsistencyReport label_consistency_report(const ValidatedHashtagNetwork& net,
                                                       const HashtagSeedLabels& seeds) {
    LabelConsistencyReport rep;
    std::map<std::string, uint64_t> cross_count;
    for (const auto& e : net.edges) {
        const auto ia = seeds.camps.find(e.a);
        const auto ib = seeds.camps.find(e.b);
        if (ia == seeds.camps.end() || ib == seeds.camps.end()) continue;
        ++rep.labeled_edges;
        if (ia->second != ib->second) {
            rep.cross_edges.push_back({e.a, e.b, ia->second, ib->second, e.p});
            ++cross_count[e.a];
            ++cross_count[e.b];
        }
    }
    rep.cross_fraction = rep.labeled_edges ? double(rep.cross_edges.size()) / rep.labeled_edges : 0.0;
    rep.suspects.assign(cross_count.begin(), cross_count.end());
    std::sort(rep.suspects.begin(), rep.suspects.end(), [](const auto& x, const auto& y) {
        return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    return rep;
}

// Synchronous majority-label propagation over validated edges. Seeds never
// change; a tie (or no labeled neighbor) leaves the vertex as it was. Stops at
// a fixpoint or after max_rounds.
inline std::map<std::string, Camp> propagate_labels(const ValidatedHashtagNetwork& net,
                                                    const HashtagSeedLabels& seeds,
                                                    unsigned max_rounds = 10) {
    if (seeds.camps.empty()) throw std::invalid_argument("propagate_labels: no seeds");
    std::map<std::string, Camp> labels = seeds.camps;
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : net.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    for (unsigned round = 0; round < max_rounds; ++round) {
        std::map<std::string, Camp> next = labels;
        bool changed = false;
        for (const auto& [v, nbrs] : adj) {
            if (seeds.camps.count(v)) continue;
            int tally[3] = {0, 0, 0};
            for (const auto& u : nbrs) {
                const auto it = labels.find(u);
                if (it != labels.end()) ++tally[size_t(it->second)];
            }
            int best = std::max({tally[0], tally[1], tally[2]});
            if (best == 0) continue;
            const int n_best = (tally[0] == best) + (tally[1] == best) + (tally[2] == best);
            if (n_best != 1) continue;  // tie: leave as-is
            const Camp c = tally[0] == best ? Camp::F : (tally[1] == best ? Camp::M : Camp::T);
            const auto it = next.find(v);
            if (it == next.end() || it->second != c) {
                next[v] = c;
                changed = true;
            }
        }
        labels = std::move(next);
        if (!changed) break;
    }
    return labels;
}

// --- exports -----------------------------------------------------------------------

inline std::string edges_to_csv(const ValidatedHashtagNetwork& net) {
    std::string out = "hashtag_i,hashtag_j,k,p\n";
    for (const auto& e : net.edges)
        out += e.a + "," + e.b + "," + std::to_string(e.k) + "," + csv::fmt_g(e.p) + "\n";
    return out;
}

inline std::string vertices_to_csv(const ValidatedHashtagNetwork& net,
                                   const HashtagSeedLabels& seeds) {
    std::string out = "hashtag,count,camp\n";
    for (const auto& [tag, count] : net.vertices) {
        const auto it = seeds.camps.find(tag);
        out += tag + "," + std::to_string(count) + "," +
               (it != seeds.camps.end() ? to_string(it->second) : "") + "\n";
    }
    return out;
}

// Frequency table, most used first.
inline std::string frequencies_to_csv(const CooccurrenceCounts& counts) {
    std::vector<std::pair<std::string, uint64_t>> rows(counts.occurrences.begin(),
                                                       counts.occurrences.end());
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
        return x.second != y.second ? x.second > y.second : x.first < y.first;
    });
    std::string out = "hashtag,count\n";
    for (const auto& [tag, count] : rows) out += tag + "," + std::to_string(count) + "\n";
    return out;
}

}  // namespace voxpop::hashnet
