#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxpop/core.hpp"
#include "voxpop/csv.hpp"

namespace voxpop::survey {

// Canonical candidate labels; "Other" in the transition table aggregates
// everything that is not AF-CFK or MM-MP.
inline const std::vector<std::string>& candidate_labels() {
    static const std::vector<std::string> labels = {
        "AF-CFK", "MM-MP", "Lavagna", "Del Cano", "Espert", "Gomez Centurion",
        "Blank/Null", "Unknown/Other"};
    return labels;
}

inline const std::vector<std::string>& age_groups() {
    static const std::vector<std::string> v = {"16-30", "31-50", "51-65", "65+"};
    return v;
}

inline const std::vector<std::string>& education_levels() {
    static const std::vector<std::string> v = {"full secondary", "incomplete secondary",
                                               "full/incomplete university"};
    return v;
}

inline const std::vector<std::string>& image_values() {
    static const std::vector<std::string> v = {"Positive", "Negative", "Regular", "NS/NC"};
    return v;
}

struct PanelResponse {
    std::string respondent_id;
    std::string pre_choice;
    std::string post_choice;
    std::string age_group;
    std::string gender;     // "M" or "F"
    std::string education;
    std::string image_cfk;
    std::string image_mm;
    std::string image_af;
    double weight = 1.0;
};

// Whole-percent display rounding (half away from zero), shared by every table.
inline long long round_pct(double pct) { return std::llround(pct); }

// Pre-choices marked with * in the source table: they never enter the
// revealed / not-revealed denominator.
inline bool in_disclosure_scope(const PanelResponse& r) { return r.pre_choice != "Unknown/Other"; }

// A respondent "revealed" their vote when the post-election answer matches the
// pre-election one (secondary candidates map to themselves, Blank/Null to
// itself).
inline bool revealed(const PanelResponse& r) { return r.post_choice == r.pre_choice; }

// --- panel CSV ------------------------------------------------------------------

inline std::string panel_to_csv(const std::vector<PanelResponse>& panel) {
    std::string out =
        "respondent_id,pre_choice,post_choice,age_group,gender,education,"
        "image_cfk,image_mm,image_af,weight\n";
    for (const auto& r : panel) {
        out += r.respondent_id + "," + csv::quote(r.pre_choice) + "," + csv::quote(r.post_choice) +
               "," + r.age_group + "," + r.gender + "," + csv::quote(r.education) + "," +
               csv::quote(r.image_cfk) + "," + csv::quote(r.image_mm) + "," +
               csv::quote(r.image_af) + "," + csv::fmt_g(r.weight) + "\n";
    }
    return out;
}

inline std::vector<PanelResponse> load_panel(const std::string& path) {
    std::vector<PanelResponse> panel;
    for (const auto& row : csv::read_file(path)) {
        if (row.size() < 10) throw DataError("panel csv: expected 10 columns in " + path);
        if (row[0] == "respondent_id") continue;
        PanelResponse r;
        r.respondent_id = row[0];
        r.pre_choice = row[1];
        r.post_choice = row[2];
        r.age_group = row[3];
        r.gender = row[4];
        r.education = row[5];
        r.image_cfk = row[6];
        r.image_mm = row[7];
        r.image_af = row[8];
        r.weight = std::stod(row[9]);
        if (!(r.weight > 0)) throw DataError("panel csv: non-positive weight for " + r.respondent_id);
        panel.push_back(std::move(r));
    }
    return panel;
}

// --- raking (iterative proportional fitting) ---------------------------------------

// axis -> (category -> target fraction); each axis must sum to 1.
struct DemographicMargins {
    std::map<std::string, std::map<std::string, double>> targets;

    void validate() const {
        for (const auto& [axis, cats] : targets) {
            double sum = 0;
            for (const auto& [cat, f] : cats) {
                if (!(f >= 0)) throw DataError("margins: negative fraction for " + axis + "/" + cat);
                sum += f;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw DataError("margins: axis '" + axis + "' fractions sum to " + std::to_string(sum));
        }
    }

    // CSV `axis,category,fraction`
    static DemographicMargins load(const std::string& path) {
        DemographicMargins m;
        for (const auto& row : csv::read_file(path)) {
            if (row.size() < 3) throw DataError("margins csv: expected axis,category,fraction");
            if (row[0] == "axis") continue;
            m.targets[row[0]][row[1]] = std::stod(row[2]);
        }
        m.validate();
        return m;
    }
};

struct RakingWeights {
    std::map<std::string, double> weights;  // respondent_id -> weight, mean 1
    unsigned iterations = 0;
    double max_margin_error = 0.0;
    bool converged = false;
    std::vector<std::string> warnings;

    std::string to_csv() const {
        std::string out = "respondent_id,weight\n";
        for (const auto& [id, w] : weights) out += id + "," + csv::fmt_g(w, 12) + "\n";
        return out;
    }
};

// The category a respondent belongs to on a named axis.
inline const std::string& axis_category(const PanelResponse& r, const std::string& axis) {
    if (axis == "age_group") return r.age_group;
    if (axis == "gender") return r.gender;
    if (axis == "education") return r.education;
    throw DataError("raking: unknown axis '" + axis + "'");
}

// Classic IPF: cycle the axes, scaling each category's weights to its target
// share. Starts from the sample's own weights, so re-raking an already raked
// sample is a fixpoint.
inline RakingWeights rake(const std::vector<PanelResponse>& sample, DemographicMargins margins,
                          double tol = 1e-6, unsigned max_iter = 100) {
    if (sample.empty()) throw DataError("rake: empty sample");
    margins.validate();
    RakingWeights result;

    // Drop margin categories absent from the sample, renormalizing the axis.
    for (auto& [axis, cats] : margins.targets) {
        std::set<std::string> present;
        for (const auto& r : sample) present.insert(axis_category(r, axis));
        for (auto it = cats.begin(); it != cats.end();) {
            if (!present.count(it->first)) {
                result.warnings.push_back("axis " + axis + ": category '" + it->first +
                                          "' absent from sample, dropped");
                it = cats.erase(it);
            } else {
                ++it;
            }
        }
        double sum = 0;
        for (const auto& [cat, f] : cats) sum += f;
        if (sum <= 0) throw DataError("rake: axis '" + axis + "' has no usable categories");
        for (auto& [cat, f] : cats) f /= sum;
        for (const auto& cat : present)
            if (!cats.count(cat))
                throw DataError("rake: sample category '" + cat + "' missing from margins of axis " +
                                axis);
        for (const auto& [cat, f] : cats)
            if (!(f > 0))
                throw DataError("rake: axis " + axis + "/" + cat + " has a zero target share");
    }

    std::vector<double> w(sample.size());
    for (size_t i = 0; i < sample.size(); ++i) w[i] = sample[i].weight;

    const auto max_error = [&]() {
        double worst = 0;
        double total = 0;
        for (const double x : w) total += x;
        for (const auto& [axis, cats] : margins.targets) {
            std::map<std::string, double> cur;
            for (size_t i = 0; i < sample.size(); ++i) cur[axis_category(sample[i], axis)] += w[i];
            for (const auto& [cat, target] : cats)
                worst = std::max(worst, std::abs(cur[cat] / total - target));
        }
        return worst;
    };

    result.max_margin_error = max_error();
    for (unsigned iter = 0; iter < max_iter; ++iter) {
        if (result.max_margin_error < tol) {
            result.converged = true;
            break;
        }
        for (const auto& [axis, cats] : margins.targets) {
            std::map<std::string, double> cur;
            double total = 0;
            for (size_t i = 0; i < sample.size(); ++i) {
                cur[axis_category(sample[i], axis)] += w[i];
                total += w[i];
            }
            for (size_t i = 0; i < sample.size(); ++i) {
                const auto& cat = axis_category(sample[i], axis);
                w[i] *= cats.at(cat) * total / cur.at(cat);
            }
        }
        ++result.iterations;
        result.max_margin_error = max_error();
    }
    if (result.max_margin_error < tol) result.converged = true;

    double mean = 0;
    for (const double x : w) mean += x;
    mean /= double(w.size());
    for (size_t i = 0; i < sample.size(); ++i) result.weights[sample[i].respondent_id] = w[i] / mean;
    return result;
}

// --- weighted tables ------------------------------------------------------------------

enum class ChoiceField { Pre, Post };

inline std::map<std::string, double> weighted_shares(const std::vector<PanelResponse>& responses,
                                                     const std::map<std::string, double>& weights,
                                                     ChoiceField field) {
    std::map<std::string, double> acc;
    double total = 0;
    for (const auto& r : responses) {
        const auto it = weights.find(r.respondent_id);
        const double w = it != weights.end() ? it->second : r.weight;
        acc[field == ChoiceField::Pre ? r.pre_choice : r.post_choice] += w;
        total += w;
    }
    if (total <= 0) throw DataError("weighted_shares: zero total weight");
    for (auto& [cat, v] : acc) v /= total;
    return acc;
}

struct TransitionRow {
    std::string pre_choice;
    double af_pct = 0, mm_pct = 0, other_pct = 0;  // row-normalized percentages
    std::optional<double> kept_pct;                // absent for Unknown/Other
    double row_weight = 0;
};

// The vote-disclosure matrix: where each pre-election answer went, plus the
// share that kept their stated vote. Empty rows are omitted.
inline std::vector<TransitionRow> transition_table(const std::vector<PanelResponse>& panel) {
    std::vector<TransitionRow> rows;
    for (const auto& pre : candidate_labels()) {
        TransitionRow row;
        row.pre_choice = pre;
        double af = 0, mm = 0, other = 0, kept = 0;
        for (const auto& r : panel) {
            if (r.pre_choice != pre) continue;
            row.row_weight += r.weight;
            if (r.post_choice == "AF-CFK") af += r.weight;
            else if (r.post_choice == "MM-MP") mm += r.weight;
            else other += r.weight;
            if (revealed(r)) kept += r.weight;
        }
        if (row.row_weight <= 0) continue;  // empty row category
        row.af_pct = 100.0 * af / row.row_weight;
        row.mm_pct = 100.0 * mm / row.row_weight;
        row.other_pct = 100.0 * other / row.row_weight;
        if (pre != "Unknown/Other") row.kept_pct = 100.0 * kept / row.row_weight;
        rows.push_back(row);
    }
    return rows;
}

inline std::string transition_to_csv(const std::vector<TransitionRow>& rows) {
    std::string out = "pre_choice,af_cfk_pct,mm_mp_pct,other_pct,kept_pct\n";
    for (const auto& r : rows) {
        out += csv::quote(r.pre_choice) + "," + csv::fmt(r.af_pct, 4) + "," +
               csv::fmt(r.mm_pct, 4) + "," + csv::fmt(r.other_pct, 4) + "," +
               (r.kept_pct ? csv::fmt(*r.kept_pct, 4) : "") + "\n";
    }
    return out;
}

struct DisclosureRow {
    std::string axis;      // "gender", "age_group", "education" or "total"
    std::string category;  // display label
    double revealed_pct = 0;
    double not_revealed_pct = 0;
    double weight = 0;
};

inline std::vector<DisclosureRow> disclosure_by_demographics(const std::vector<PanelResponse>& panel) {
    std::vector<DisclosureRow> rows;
    const auto emit = [&](const std::string& axis, const std::string& display, auto&& member_of) {
        DisclosureRow row{axis, display, 0, 0, 0};
        double rev = 0;
        for (const auto& r : panel) {
            if (!in_disclosure_scope(r) || !member_of(r)) continue;
            row.weight += r.weight;
            if (revealed(r)) rev += r.weight;
        }
        if (row.weight <= 0) return;
        row.revealed_pct = 100.0 * rev / row.weight;
        row.not_revealed_pct = 100.0 - row.revealed_pct;
        rows.push_back(row);
    };
    emit("gender", "Man", [](const PanelResponse& r) { return r.gender == "M"; });
    emit("gender", "Woman", [](const PanelResponse& r) { return r.gender == "F"; });
    for (const auto& age : age_groups())
        emit("age_group", age, [&](const PanelResponse& r) { return r.age_group == age; });
    for (const auto& edu : education_levels())
        emit("education", edu, [&](const PanelResponse& r) { return r.education == edu; });
    emit("total", "Total", [](const PanelResponse&) { return true; });
    return rows;
}

inline std::string disclosure_to_csv(const std::vector<DisclosureRow>& rows) {
    std::string out = "axis,category,revealed_pct,not_revealed_pct\n";
    for (const auto& r : rows)
        out += r.axis + "," + csv::quote(r.category) + "," + csv::fmt(r.revealed_pct, 4) + "," +
               csv::fmt(r.not_revealed_pct, 4) + "\n";
    return out;
}

struct ImageRow {
    std::string candidate;  // "CFK", "MM", "AF"
    std::string group;      // "Revealed" / "Not Revealed"
    double pct[4] = {0, 0, 0, 0};  // Positive, Negative, Regular, NS/NC
};

inline std::vector<ImageRow> image_table(const std::vector<PanelResponse>& panel) {
    std::vector<ImageRow> rows;
    const auto image_of = [](const PanelResponse& r, const std::string& cand) -> const std::string& {
        if (cand == "CFK") return r.image_cfk;
        if (cand == "MM") return r.image_mm;
        return r.image_af;
    };
    for (const std::string cand : {"CFK", "MM", "AF"}) {
        for (const bool rev : {true, false}) {
            ImageRow row;
            row.candidate = cand;
            row.group = rev ? "Revealed" : "Not Revealed";
            double acc[4] = {0, 0, 0, 0};
            double total = 0;
            for (const auto& r : panel) {
                if (!in_disclosure_scope(r) || revealed(r) != rev) continue;
                const auto& img = image_of(r, cand);
                const auto& vals = image_values();
                const auto it = std::find(vals.begin(), vals.end(), img);
                if (it == vals.end()) throw DataError("image_table: unknown image value '" + img + "'");
                acc[size_t(it - vals.begin())] += r.weight;
                total += r.weight;
            }
            if (total <= 0) continue;
            for (int i = 0; i < 4; ++i) row.pct[i] = 100.0 * acc[i] / total;
            rows.push_back(row);
        }
    }
    return rows;
}

inline std::string images_to_csv(const std::vector<ImageRow>& rows) {
    std::string out = "candidate,group,positive_pct,negative_pct,regular_pct,ns_nc_pct\n";
    for (const auto& r : rows)
        out += r.candidate + "," + csv::quote(r.group) + "," + csv::fmt(r.pct[0], 4) + "," +
               csv::fmt(r.pct[1], 4) + "," + csv::fmt(r.pct[2], 4) + "," + csv::fmt(r.pct[3], 4) +
               "\n";
    return out;
}

struct PyramidCell {
    std::string age_group;
    std::string gender;
    double weight = 0;
    double fraction = 0;
};

// Age x gender distribution; every cell is present even when empty.
inline std::vector<PyramidCell> demographic_pyramid(const std::vector<PanelResponse>& sample) {
    std::vector<PyramidCell> cells;
    double total = 0;
    for (const auto& r : sample) total += r.weight;
    for (const auto& age : age_groups()) {
        for (const std::string gender : {"M", "F"}) {
            PyramidCell cell{age, gender, 0, 0};
            for (const auto& r : sample)
                if (r.age_group == age && r.gender == gender) cell.weight += r.weight;
            cell.fraction = total > 0 ? cell.weight / total : 0.0;
            cells.push_back(cell);
        }
    }
    return cells;
}

inline std::string pyramid_to_csv(const std::vector<PyramidCell>& cells) {
    std::string out = "age_group,gender,count,fraction\n";
    for (const auto& c : cells)
        out += c.age_group + "," + c.gender + "," + csv::fmt(c.weight, 4) + "," +
               csv::fmt(c.fraction, 6) + "\n";
    return out;
}

}  // namespace voxpop::survey
