#include "ragprobe/metrics/classifier.hpp"

#include <map>

#include "ragprobe/common/error.hpp"

namespace ragprobe::metrics {

ClassifierPrf classifier_prf(const ConfusionCounts& c)
{
    ClassifierPrf out;
    out.counts = c;
    const std::size_t n = c.tp + c.fp + c.fn + c.tn;
    out.precision = ratio_metric("filter_precision", static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp), n,
                                 "no positive predictions");
    out.recall = ratio_metric("filter_recall", static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn), n,
                              "no positive gold labels");
    if (!out.precision.value || !out.recall.value) {
        out.f1 = undefined_metric("filter_f1", "precision or recall undefined", n);
    } else {
        out.f1 = ratio_metric("filter_f1", 2.0 * static_cast<double>(c.tp),
                              static_cast<double>(2 * c.tp + c.fp + c.fn), n, "no positives");
    }
    return out;
}

ClassifierPrf classifier_prf(const std::vector<bool>& predictions, const std::vector<bool>& gold)
{
    if (predictions.size() != gold.size()) {
        throw InvalidArgument("predictions and gold differ in length (" + std::to_string(predictions.size()) + " vs " +
                              std::to_string(gold.size()) + ")");
    }
    ConfusionCounts c;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        if (predictions[i] && gold[i]) ++c.tp;
        else if (predictions[i]) ++c.fp;
        else if (gold[i]) ++c.fn;
        else ++c.tn;
    }
    return classifier_prf(c);
}

ClassifierPrf classifier_prf(const std::vector<std::pair<PairKey, bool>>& predictions,
                             const std::vector<std::pair<PairKey, bool>>& gold)
{
    auto index = [](const std::vector<std::pair<PairKey, bool>>& v, const char* what) {
        std::map<PairKey, bool> m;
        for (const auto& [k, b] : v) {
            if (!m.emplace(k, b).second) {
                throw InvalidArgument(std::string("duplicate ") + what + " for (" + k.first + ", " + k.second + ")");
            }
        }
        return m;
    };
    const auto p = index(predictions, "prediction");
    const auto g = index(gold, "gold label");
    std::vector<bool> pv, gv;
    for (const auto& [k, label] : g) {
        auto it = p.find(k);
        if (it == p.end()) throw InvalidArgument("no prediction for (" + k.first + ", " + k.second + ")");
        pv.push_back(it->second);
        gv.push_back(label);
    }
    if (p.size() != g.size()) {
        for (const auto& [k, b] : p) {
            if (!g.contains(k)) throw InvalidArgument("no gold label for (" + k.first + ", " + k.second + ")");
        }
    }
    return classifier_prf(pv, gv);
}

} // namespace ragprobe::metrics
