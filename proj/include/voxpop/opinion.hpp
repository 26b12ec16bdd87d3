#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "voxpop/classify.hpp"
#include "voxpop/core.hpp"
#include "voxpop/csv.hpp"
#include "voxpop/date.hpp"

namespace voxpop::opinion {

// --- per-user ledgers -------------------------------------------------------------

struct UserLedger {
    // classified-tweet counts per day, indexed [F, M, T]
    std::map<Date, std::array<uint32_t, 3>> daily;
    // chronological classified tweets; the basis of the last-k loyalty logic
    std::vector<std::pair<Date, Camp>> classified;
    Date first_seen;
    Date last_seen;
    uint64_t total_tweets = 0;  // classified or not

    uint64_t total_classified() const { return classified.size(); }
};

struct LedgerSet {
    std::map<std::string, UserLedger> users;
    Date window_start;
    Date window_end;

    bool in_window(Date d) const { return d >= window_start && d <= window_end; }
};

// Groups stance records per user. Unclassified records mark presence without
// touching counts. Records are ordered by (day, arrival) first so the
// chronological lists are well defined regardless of input order.
inline LedgerSet accumulate(std::vector<classify::StanceRecord> records,
                            std::optional<Date> window_start = std::nullopt,
                            std::optional<Date> window_end = std::nullopt) {
    std::stable_sort(records.begin(), records.end(),
                     [](const auto& a, const auto& b) { return a.day < b.day; });
    LedgerSet set;
    bool first = true;
    for (const auto& r : records) {
        auto [it, inserted] = set.users.try_emplace(r.user_id);
        UserLedger& ledger = it->second;
        if (inserted) ledger.first_seen = ledger.last_seen = r.day;
        ledger.first_seen = std::min(ledger.first_seen, r.day);
        ledger.last_seen = std::max(ledger.last_seen, r.day);
        ++ledger.total_tweets;
        if (r.stance != Stance::Unclassified) {
            const Camp c = r.stance == Stance::FF   ? Camp::F
                           : r.stance == Stance::MP ? Camp::M
                                                    : Camp::T;
            ++ledger.daily[r.day][size_t(c)];
            ledger.classified.emplace_back(r.day, c);
        }
        if (first || r.day < set.window_start) set.window_start = r.day;
        if (first || r.day > set.window_end) set.window_end = r.day;
        first = false;
    }
    if (window_start) set.window_start = *window_start;
    if (window_end) set.window_end = *window_end;
    return set;
}

namespace detail {

// Strict plurality among nonzero counts; any tie for the top is Undecided and
// all-zero is Unclassified.
inline UserOpinion plurality(uint64_t f, uint64_t m, uint64_t t) {
    if (f + m + t == 0) return UserOpinion::Unclassified;
    if (f > m && f > t) return UserOpinion::FF;
    if (m > f && m > t) return UserOpinion::MP;
    if (t > f && t > m) return UserOpinion::TP;
    return UserOpinion::Undecided;
}

// The loyalty-class inequality: a camp wins only when its count exceeds the
// other two camps combined.
inline UserOpinion majority_over_rest(uint64_t f, uint64_t m, uint64_t t) {
    if (m > f + t) return UserOpinion::MP;
    if (f > m + t) return UserOpinion::FF;
    if (t > f + m) return UserOpinion::TP;
    return UserOpinion::Undecided;
}

}  // namespace detail

// Majority stance over the last w days ending at d, summed from the daily
// count table.
inline UserOpinion window_opinion(const UserLedger& ledger, const LedgerSet& set, Date d, int w) {
    if (w < 1) throw std::domain_error("window_opinion: w must be >= 1");
    if (!set.in_window(d)) throw std::domain_error("window_opinion: day outside collection window");
    const Date from = d - (w - 1);
    uint64_t f = 0, m = 0, t = 0;
    for (auto it = ledger.daily.lower_bound(from); it != ledger.daily.end() && it->first <= d; ++it) {
        f += it->second[0];
        m += it->second[1];
        t += it->second[2];
    }
    return detail::plurality(f, m, t);
}

// Majority stance over every classified tweet in [T0, d]; Model 0's per-user
// opinion. Summed from the chronological list, deliberately a different route
// than window_opinion.
inline UserOpinion cumulative_opinion(const UserLedger& ledger, const LedgerSet& set, Date d,
                                      Date t0) {
    if (t0 > d) throw std::domain_error("cumulative_opinion: T0 must not be after d");
    if (!set.in_window(d)) throw std::domain_error("cumulative_opinion: day outside collection window");
    uint64_t counts[3] = {0, 0, 0};
    for (const auto& [day, camp] : ledger.classified) {
        if (day < t0) continue;
        if (day > d) break;
        ++counts[size_t(camp)];
    }
    return detail::plurality(counts[0], counts[1], counts[2]);
}

struct LoyaltyClass {
    UserOpinion base = UserOpinion::Unclassified;    // cumulative camp since T0
    UserOpinion recent = UserOpinion::Undecided;     // last-k camp, never Unclassified
    bool ultra_loyal = false;                        // every classified tweet in one camp
};

inline LoyaltyClass loyalty_class(const UserLedger& ledger, const LedgerSet& set, Date d, Date t0,
                                  unsigned k = 10) {
    LoyaltyClass lc;
    lc.base = cumulative_opinion(ledger, set, d, t0);
    // classified tweets within [t0, d]
    size_t begin = 0, end = 0;
    for (size_t i = 0; i < ledger.classified.size(); ++i) {
        if (ledger.classified[i].first < t0) begin = i + 1;
        if (ledger.classified[i].first <= d) end = i + 1;
    }
    if (end <= begin) return lc;  // base is Unclassified, nothing recent
    uint64_t all[3] = {0, 0, 0};
    for (size_t i = begin; i < end; ++i) ++all[size_t(ledger.classified[i].second)];
    lc.ultra_loyal = (all[0] + all[1] + all[2] > 0) &&
                     (all[0] == 0) + (all[1] == 0) + (all[2] == 0) == 2;
    const size_t n = end - begin;
    const size_t take = std::min<size_t>(k, n);
    uint64_t recent[3] = {0, 0, 0};
    for (size_t i = end - take; i < end; ++i) ++recent[size_t(ledger.classified[i].second)];
    lc.recent = detail::majority_over_rest(recent[0], recent[1], recent[2]);
    return lc;
}

// --- retweet graph -----------------------------------------------------------------

// Undirected simple graph over user ids: an edge means either user retweeted
// the other at least once.
struct RetweetGraph {
    std::vector<std::string> names;
    std::unordered_map<std::string, uint32_t> ids;
    std::vector<std::vector<uint32_t>> adjacency;

    std::optional<uint32_t> id_of(const std::string& user) const {
        const auto it = ids.find(user);
        if (it == ids.end()) return std::nullopt;
        return it->second;
    }

    uint32_t intern(const std::string& user) {
        const auto it = ids.find(user);
        if (it != ids.end()) return it->second;
        const auto id = uint32_t(names.size());
        ids.emplace(user, id);
        names.push_back(user);
        adjacency.emplace_back();
        return id;
    }

    size_t edge_count() const {
        size_t n = 0;
        for (const auto& a : adjacency) n += a.size();
        return n / 2;
    }
};

inline RetweetGraph build_retweet_graph(const std::vector<ingest::CleanTweet>& tweets,
                                        const std::unordered_set<std::string>& excluded_users = {}) {
    RetweetGraph g;
    for (const auto& t : tweets) {
        if (!t.retweet_of_user_id) continue;
        if (t.user_id == *t.retweet_of_user_id) continue;  // no self-loops
        if (excluded_users.count(t.user_id) || excluded_users.count(*t.retweet_of_user_id)) continue;
        const uint32_t a = g.intern(t.user_id);
        const uint32_t b = g.intern(*t.retweet_of_user_id);
        g.adjacency[a].push_back(b);
        g.adjacency[b].push_back(a);
    }
    for (auto& nbrs : g.adjacency) {
        std::sort(nbrs.begin(), nbrs.end());
        nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    }
    return g;
}

// Plurality camp of the user's decided neighbors, read from a frozen label
// snapshot; ties and isolated users stay Undecided.
inline UserOpinion homophily_label(const std::string& user, const RetweetGraph& graph,
                                   const std::map<std::string, Camp>& decided_labels) {
    const auto id = graph.id_of(user);
    if (!id) return UserOpinion::Undecided;
    uint64_t tally[3] = {0, 0, 0};
    for (const uint32_t nbr : graph.adjacency[*id]) {
        const auto it = decided_labels.find(graph.names[nbr]);
        if (it != decided_labels.end()) ++tally[size_t(it->second)];
    }
    return detail::plurality(tally[0], tally[1], tally[2]);
}

// --- prediction models ----------------------------------------------------------------

// Final per-user bucket under a model. Undecided survives only under Model 0,
// where it is reported outside the normalization.
enum class ModelBucket : uint8_t { FF, MP, Third, Undecided };

struct PredictionShares {
    Date day;
    int model_id = 0;
    double ff = 0, mp = 0, third = 0;  // normalized over the three camps
    double undecided = 0;              // Model 0 only; share of classified users
    uint64_t n_ff = 0, n_mp = 0, n_third = 0, n_undecided = 0;
    uint64_t n_users = 0;              // users contributing to the shares

    nlohmann::json to_json() const {
        return {{"day", day.str()},   {"model", model_id},       {"ff", ff},
                {"mp", mp},           {"third", third},          {"undecided", undecided},
                {"n_ff", n_ff},       {"n_mp", n_mp},            {"n_third", n_third},
                {"n_undecided", n_undecided}, {"n_users", n_users}};
    }
};

// Per-user final assignments for one model over the range [range_start, day].
// Model 0 buckets by cumulative opinion alone. Models 1-3 bucket by the
// loyalty base camp, then use retweet homophily to rescue base-Undecided
// (Models 2-3) and Unclassified (Model 3) users; whoever remains lands in
// Third. Homophily reads one frozen snapshot of the decided base camps.
inline std::map<std::string, ModelBucket> model_user_assignments(
    int model_id, Date day, const LedgerSet& ledgers, const RetweetGraph& graph, Date range_start,
    unsigned k = 10) {
    if (model_id < 0 || model_id > 3) throw std::domain_error("predict: unknown model id");
    std::map<std::string, ModelBucket> out;

    if (model_id == 0) {
        for (const auto& [user, ledger] : ledgers.users) {
            switch (cumulative_opinion(ledger, ledgers, day, range_start)) {
                case UserOpinion::FF: out[user] = ModelBucket::FF; break;
                case UserOpinion::MP: out[user] = ModelBucket::MP; break;
                case UserOpinion::TP: out[user] = ModelBucket::Third; break;
                case UserOpinion::Undecided: out[user] = ModelBucket::Undecided; break;
                case UserOpinion::Unclassified: break;  // not a classified user
            }
        }
        return out;
    }

    std::map<std::string, Camp> decided;  // frozen homophily snapshot
    std::vector<std::string> undecided_users, unclassified_users;
    for (const auto& [user, ledger] : ledgers.users) {
        const LoyaltyClass lc = loyalty_class(ledger, ledgers, day, range_start, k);
        switch (lc.base) {
            case UserOpinion::FF:
                out[user] = ModelBucket::FF;
                decided.emplace(user, Camp::F);
                break;
            case UserOpinion::MP:
                out[user] = ModelBucket::MP;
                decided.emplace(user, Camp::M);
                break;
            case UserOpinion::TP:
                out[user] = ModelBucket::Third;
                decided.emplace(user, Camp::T);
                break;
            case UserOpinion::Undecided:
                undecided_users.push_back(user);
                break;
            case UserOpinion::Unclassified:
                unclassified_users.push_back(user);
                break;
        }
    }

    const auto rescue = [&](const std::vector<std::string>& users) {
        for (const auto& user : users) {
            switch (homophily_label(user, graph, decided)) {
                case UserOpinion::FF: out[user] = ModelBucket::FF; break;
                case UserOpinion::MP: out[user] = ModelBucket::MP; break;
                case UserOpinion::TP: out[user] = ModelBucket::Third; break;
                default: out[user] = ModelBucket::Third; break;  // stays in the third bucket
            }
        }
    };
    const auto to_third = [&](const std::vector<std::string>& users) {
        for (const auto& user : users) out[user] = ModelBucket::Third;
    };

    if (model_id == 1) {
        to_third(undecided_users);
        to_third(unclassified_users);
    } else if (model_id == 2) {
        rescue(undecided_users);
        to_third(unclassified_users);
    } else {
        rescue(undecided_users);
        rescue(unclassified_users);
    }
    return out;
}

inline PredictionShares predict(int model_id, Date day, const LedgerSet& ledgers,
                                const RetweetGraph& graph, Date t0, unsigned k = 10) {
    const auto assignments = model_user_assignments(model_id, day, ledgers, graph, t0, k);
    PredictionShares shares;
    shares.day = day;
    shares.model_id = model_id;
    for (const auto& [user, bucket] : assignments) {
        switch (bucket) {
            case ModelBucket::FF: ++shares.n_ff; break;
            case ModelBucket::MP: ++shares.n_mp; break;
            case ModelBucket::Third: ++shares.n_third; break;
            case ModelBucket::Undecided: ++shares.n_undecided; break;
        }
    }
    shares.n_users = shares.n_ff + shares.n_mp + shares.n_third + shares.n_undecided;
    const uint64_t denom = shares.n_ff + shares.n_mp + shares.n_third;
    if (denom == 0) throw DataError("predict: no users in any camp bucket");
    shares.ff = double(shares.n_ff) / double(denom);
    shares.mp = double(shares.n_mp) / double(denom);
    shares.third = double(shares.n_third) / double(denom);
    shares.undecided = shares.n_users ? double(shares.n_undecided) / double(shares.n_users) : 0.0;
    return shares;
}

// --- forecast error ---------------------------------------------------------------------

struct ShareTriple {
    double ff = 0, mp = 0, third = 0;  // percent
};

// Mean absolute error over the three camp shares, in percentage points.
inline double mae(const ShareTriple& pred, const ShareTriple& official) {
    return (std::abs(pred.ff - official.ff) + std::abs(pred.mp - official.mp) +
            std::abs(pred.third - official.third)) /
           3.0;
}

inline ShareTriple to_percent(const PredictionShares& s) {
    return {s.ff * 100.0, s.mp * 100.0, s.third * 100.0};
}

struct T0Sensitivity {
    ShareTriple mean;  // percent
    ShareTriple stddev;
    std::vector<PredictionShares> runs;

    // the quoted +/- of the paper: average of the per-camp standard deviations
    double mean_std() const { return (stddev.ff + stddev.mp + stddev.third) / 3.0; }
};

// Recomputes the prediction for several measurement origins and reports the
// per-camp mean and population standard deviation.
inline T0Sensitivity t0_sensitivity(int model_id, Date day, const LedgerSet& ledgers,
                                    const RetweetGraph& graph, const std::vector<Date>& t0s,
                                    unsigned k = 10) {
    if (t0s.size() < 2) throw std::domain_error("t0_sensitivity: need at least two T0 values");
    for (const Date t0 : t0s)
        if (!(t0 < day)) throw std::domain_error("t0_sensitivity: every T0 must precede day");
    T0Sensitivity out;
    for (const Date t0 : t0s) out.runs.push_back(predict(model_id, day, ledgers, graph, t0, k));
    const double n = double(out.runs.size());
    for (const auto& r : out.runs) {
        out.mean.ff += r.ff * 100.0;
        out.mean.mp += r.mp * 100.0;
        out.mean.third += r.third * 100.0;
    }
    out.mean.ff /= n;
    out.mean.mp /= n;
    out.mean.third /= n;
    for (const auto& r : out.runs) {
        const auto sq = [](double x) { return x * x; };
        out.stddev.ff += sq(r.ff * 100.0 - out.mean.ff);
        out.stddev.mp += sq(r.mp * 100.0 - out.mean.mp);
        out.stddev.third += sq(r.third * 100.0 - out.mean.third);
    }
    out.stddev.ff = std::sqrt(out.stddev.ff / n);
    out.stddev.mp = std::sqrt(out.stddev.mp / n);
    out.stddev.third = std::sqrt(out.stddev.third / n);
    return out;
}

// --- time series ----------------------------------------------------------------------

struct SeriesOptions {
    std::optional<int> window_days;       // moving window instead of cumulative-from-T0
    Date t0;                              // used when window_days is absent
    unsigned k = 10;
    std::vector<std::pair<Date, std::string>> markers;  // election dates
};

// One row per day; marker rows carry the event name in the model column.
// A windowed series at day d evaluates exactly the days d-w+1 .. d.
inline std::string emit_series(int model_id, Date from, Date to, const LedgerSet& ledgers,
                               const RetweetGraph& graph, const SeriesOptions& opt) {
    if (from > to) throw std::domain_error("emit_series: empty day range");
    std::string out = "date,model,ff,mp,third,undecided,n_users\n";
    for (Date d = from; d <= to; ++d) {
        for (const auto& [md, name] : opt.markers)
            if (md == d) out += d.str() + "," + name + ",,,,,\n";
        const Date start = opt.window_days ? d - (*opt.window_days - 1) : opt.t0;
        const auto s = predict(model_id, d, ledgers, graph, start, opt.k);
        out += d.str() + "," + std::to_string(model_id) + "," + csv::fmt(s.ff) + "," +
               csv::fmt(s.mp) + "," + csv::fmt(s.third) + "," + csv::fmt(s.undecided) + "," +
               std::to_string(s.n_users) + "\n";
    }
    return out;
}

// Official results file: CSV `camp,share_percent` with camps FF, MP, TP.
inline ShareTriple load_official_results(const std::string& path) {
    ShareTriple t;
    bool have_ff = false, have_mp = false, have_tp = false;
    for (const auto& row : csv::read_file(path)) {
        if (row.size() < 2 || row[0] == "camp") continue;
        const double v = std::stod(row[1]);
        if (row[0] == "FF") { t.ff = v; have_ff = true; }
        else if (row[0] == "MP") { t.mp = v; have_mp = true; }
        else if (row[0] == "TP") { t.third = v; have_tp = true; }
        else throw DataError("official results: unknown camp " + row[0]);
    }
    if (!have_ff || !have_mp || !have_tp)
        throw DataError("official results: need FF, MP and TP rows in " + path);
    return t;
}

}  // namespace voxpop::opinion
