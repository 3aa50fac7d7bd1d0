#include "ragprobe/metrics/report.hpp"

#include <cstdio>
#include <sstream>

#include "ragprobe/common/error.hpp"

namespace ragprobe::metrics {

MetricReport defined_metric(std::string metric, double value, std::size_t n, Stratum stratum)
{
    MetricReport r;
    r.metric = std::move(metric);
    r.value = value;
    r.n = n;
    r.stratum = std::move(stratum);
    return r;
}

MetricReport undefined_metric(std::string metric, std::string reason, std::size_t n, Stratum stratum)
{
    MetricReport r;
    r.metric = std::move(metric);
    r.undefined_reason = std::move(reason);
    r.n = n;
    r.stratum = std::move(stratum);
    return r;
}

MetricReport ratio_metric(std::string metric, double num, double den, std::size_t n, const std::string& reason)
{
    if (den == 0.0) return undefined_metric(std::move(metric), reason, n);
    return defined_metric(std::move(metric), num / den, n);
}

Json to_json(const MetricReport& r)
{
    Json j{{"metric", r.metric}, {"n", r.n}, {"stratum", r.stratum}};
    j["value"] = r.value ? Json(*r.value) : Json(nullptr);
    if (!r.value) j["undefined_reason"] = r.undefined_reason;
    j["ci_low"] = r.ci_low ? Json(*r.ci_low) : Json(nullptr);
    j["ci_high"] = r.ci_high ? Json(*r.ci_high) : Json(nullptr);
    return j;
}

MetricReport metric_report_from_json(const Json& j)
{
    MetricReport r;
    try {
        r.metric = j.at("metric").get<std::string>();
        r.n = j.value("n", std::size_t{0});
        r.stratum = j.value("stratum", Stratum{});
        if (auto v = j.find("value"); v != j.end() && !v->is_null()) r.value = v->get<double>();
        r.undefined_reason = j.value("undefined_reason", std::string{});
        if (auto v = j.find("ci_low"); v != j.end() && !v->is_null()) r.ci_low = v->get<double>();
        if (auto v = j.find("ci_high"); v != j.end() && !v->is_null()) r.ci_high = v->get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed metric report: ") + e.what());
    }
    return r;
}

std::string render_table(const std::vector<MetricReport>& reports)
{
    auto stratum_text = [](const Stratum& s) {
        std::string out;
        for (const auto& [k, v] : s) {
            if (!out.empty()) out += ' ';
            out += k + "=" + v;
        }
        return out.empty() ? std::string("-") : out;
    };
    std::size_t wm = 6, ws = 7;
    for (const auto& r : reports) {
        wm = std::max(wm, r.metric.size());
        ws = std::max(ws, stratum_text(r.stratum).size());
    }
    std::ostringstream os;
    char buf[128];
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(w, s.size()), ' ');
        return s;
    };
    os << pad("metric", wm) << "  " << pad("stratum", ws) << "  " << pad("value", 8) << "  " << pad("95% CI", 17)
       << "  n\n";
    for (const auto& r : reports) {
        std::string value = "null";
        if (r.value) {
            std::snprintf(buf, sizeof buf, "%.3f", *r.value);
            value = buf;
        }
        std::string ci = "-";
        if (r.ci_low && r.ci_high) {
            std::snprintf(buf, sizeof buf, "(%.3f, %.3f)", *r.ci_low, *r.ci_high);
            ci = buf;
        }
        os << pad(r.metric, wm) << "  " << pad(stratum_text(r.stratum), ws) << "  " << pad(value, 8) << "  "
           << pad(ci, 17) << "  " << r.n;
        if (!r.value && !r.undefined_reason.empty()) os << "  (" << r.undefined_reason << ")";
        os << '\n';
    }
    return os.str();
}

} // namespace ragprobe::metrics
