#include "tqd/quality.hpp"

#include "tqd/error.hpp"
#include "tqd/io.hpp"
#include "tqd/rng.hpp"
#include "tqd/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tqd {

using nlohmann::json;

namespace {

void require_nonempty(std::span<const QualityRecord> records) {
    if (records.empty()) throw Error(ErrorKind::Data, "empty dataset");
}

void require_finite(const QualityRecord& r) {
    if (!std::isfinite(r.mq_raw) || !std::isfinite(r.vq_raw)) {
        throw Error(ErrorKind::Data, "non-finite score in record '" + r.id + "'");
    }
}

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
    const double upper = v[n / 2];
    if (n % 2 == 1) return upper;
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2));
    return 0.5 * (lower + upper);
}

}  // namespace

double normalize_value(double raw, double lo, double hi) {
    if (hi == lo) return 0.5;
    return (raw - lo) / (hi - lo);
}

NormalizedDataset normalize_scores(std::span<const QualityRecord> records) {
    require_nonempty(records);
    NormalizedDataset out;
    auto& c = out.constants;
    c.mq_min = c.vq_min = INFINITY;
    c.mq_max = c.vq_max = -INFINITY;
    for (const auto& r : records) {
        require_finite(r);
        c.mq_min = std::min(c.mq_min, r.mq_raw);
        c.mq_max = std::max(c.mq_max, r.mq_raw);
        c.vq_min = std::min(c.vq_min, r.vq_raw);
        c.vq_max = std::max(c.vq_max, r.vq_raw);
    }
    out.records.assign(records.begin(), records.end());
    for (auto& r : out.records) {
        r.mq_norm = normalize_value(r.mq_raw, c.mq_min, c.mq_max);
        r.vq_norm = normalize_value(r.vq_raw, c.vq_min, c.vq_max);
    }
    return out;
}

std::vector<QualityRecord> apply_normalization(std::span<const QualityRecord> records,
                                               const NormalizationConstants& c) {
    std::vector<QualityRecord> out(records.begin(), records.end());
    for (auto& r : out) {
        require_finite(r);
        r.mq_norm = std::clamp(normalize_value(r.mq_raw, c.mq_min, c.mq_max), 0.0, 1.0);
        r.vq_norm = std::clamp(normalize_value(r.vq_raw, c.vq_min, c.vq_max), 0.0, 1.0);
    }
    return out;
}

std::string_view quadrant_name(Quadrant q) {
    switch (q) {
        case Quadrant::HMHV: return "HMHV";
        case Quadrant::HMLV: return "HMLV";
        case Quadrant::LMHV: return "LMHV";
        case Quadrant::LMLV: return "LMLV";
    }
    return "?";
}

std::optional<Quadrant> parse_quadrant(std::string_view name) {
    for (int i = 0; i < 4; ++i) {
        const auto q = static_cast<Quadrant>(i);
        if (quadrant_name(q) == name) return q;
    }
    return std::nullopt;
}

Quadrant classify(const QualityRecord& r, double mq_threshold, double vq_threshold) {
    const bool high_mq = r.mq_raw > mq_threshold;
    const bool high_vq = r.vq_raw > vq_threshold;
    if (high_mq) return high_vq ? Quadrant::HMHV : Quadrant::HMLV;
    return high_vq ? Quadrant::LMHV : Quadrant::LMLV;
}

QuadrantPartition partition_quadrants(std::span<const QualityRecord> records, double mq_threshold,
                                      double vq_threshold) {
    require_nonempty(records);
    QuadrantPartition p;
    p.mq_threshold = mq_threshold;
    p.vq_threshold = vq_threshold;
    for (const auto& r : records) ++p.counts[static_cast<int>(classify(r, mq_threshold, vq_threshold))];
    const double n = static_cast<double>(records.size());
    for (int i = 0; i < 4; ++i) p.fractions[i] = static_cast<double>(p.counts[i]) / n;
    return p;
}

std::pair<double, double> median_thresholds(std::span<const QualityRecord> records) {
    require_nonempty(records);
    std::vector<double> mq, vq;
    mq.reserve(records.size());
    vq.reserve(records.size());
    for (const auto& r : records) {
        mq.push_back(r.mq_raw);
        vq.push_back(r.vq_raw);
    }
    return {median_of(std::move(mq)), median_of(std::move(vq))};
}

PopulationStats pearson_correlation(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n < 3 || y.size() != n) throw Error(ErrorKind::Data, "pearson correlation needs at least 3 paired samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::Data, "constant score sequence");
    PopulationStats s;
    s.n = n;
    s.pearson_r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double dof = static_cast<double>(n - 2);
    const double one_minus = 1.0 - s.pearson_r * s.pearson_r;
    s.p_value = one_minus <= 0.0 ? 0.0
                                 : stats::student_t_two_sided_p(s.pearson_r * std::sqrt(dof / one_minus), dof);
    return s;
}

PopulationStats pearson_correlation(std::span<const QualityRecord> records) {
    std::vector<double> mq, vq;
    mq.reserve(records.size());
    vq.reserve(records.size());
    for (const auto& r : records) {
        require_finite(r);
        mq.push_back(r.mq_raw);
        vq.push_back(r.vq_raw);
    }
    return pearson_correlation(mq, vq);
}

std::string synth_payload_for_scores(double mq_raw, double vq_raw, std::uint64_t seed) {
    // Motion speed grows with MQ, texture noise grows as VQ drops.
    const double speed = std::clamp(mq_raw - 1.5, 0.0, 3.0);
    const double noise = std::clamp(0.1 * (3.7 - vq_raw), 0.0, 0.3);
    char buf[128];
    std::snprintf(buf, sizeof buf, "synth:speed=%.4f,noise=%.4f,seed=%llu", speed, noise,
                  static_cast<unsigned long long>(seed));
    return buf;
}

std::vector<QualityRecord> synth_population(std::size_t n, double target_r, std::uint64_t seed,
                                            const PopulationShape& shape) {
    if (!(std::abs(target_r) < 1.0)) throw Error(ErrorKind::Usage, "target correlation must satisfy |r| < 1");
    Rng rng(seed);
    const double ortho = std::sqrt(1.0 - target_r * target_r);
    std::vector<QualityRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = rng.normal();
        const double z2 = target_r * z1 + ortho * rng.normal();
        QualityRecord r;
        r.id = "s" + std::to_string(i);
        r.mq_raw = shape.mq_mean + shape.mq_std * z1;
        r.vq_raw = shape.vq_mean + shape.vq_std * z2;
        r.payload = synth_payload_for_scores(r.mq_raw, r.vq_raw, seed * 1000003ULL + i);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<QualityRecord> inject_score_noise(std::span<const QualityRecord> records, double noise_level,
                                              std::uint64_t seed) {
    if (!(noise_level >= 0.0)) throw Error(ErrorKind::Usage, "noise level must be >= 0");
    std::vector<QualityRecord> out(records.begin(), records.end());
    if (noise_level == 0.0 || out.empty()) return out;
    double mq_lo = INFINITY, mq_hi = -INFINITY, vq_lo = INFINITY, vq_hi = -INFINITY;
    for (const auto& r : out) {
        mq_lo = std::min(mq_lo, r.mq_raw);
        mq_hi = std::max(mq_hi, r.mq_raw);
        vq_lo = std::min(vq_lo, r.vq_raw);
        vq_hi = std::max(vq_hi, r.vq_raw);
    }
    const double mq_std = noise_level * (mq_hi - mq_lo);
    const double vq_std = noise_level * (vq_hi - vq_lo);
    Rng rng(seed);
    for (auto& r : out) {
        r.mq_raw += mq_std * rng.normal();
        r.vq_raw += vq_std * rng.normal();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Manifest / sidecar I/O

namespace {

// NaN / Infinity are not JSON; quote bare occurrences so they parse as strings.
std::string quote_nonfinite_tokens(std::string_view line) {
    static constexpr std::string_view kTokens[] = {"-Infinity", "Infinity", "NaN", "-inf", "inf", "nan"};
    std::string out;
    out.reserve(line.size() + 8);
    bool in_string = false;
    for (std::size_t i = 0; i < line.size();) {
        const char c = line[i];
        if (in_string) {
            out += c;
            if (c == '\\' && i + 1 < line.size()) {
                out += line[i + 1];
                i += 2;
                continue;
            }
            if (c == '"') in_string = false;
            ++i;
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            ++i;
            continue;
        }
        bool matched = false;
        for (auto tok : kTokens) {
            if (line.substr(i, tok.size()) == tok) {
                out += '"';
                out += tok;
                out += '"';
                i += tok.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            out += c;
            ++i;
        }
    }
    return out;
}

double score_from_json(const json& v, const std::string& key, std::size_t line_no) {
    if (v.is_number()) return v.get<double>();
    if (v.is_null()) return NAN;
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "NaN" || s == "nan") return NAN;
        if (s == "Infinity" || s == "inf") return INFINITY;
        if (s == "-Infinity" || s == "-inf") return -INFINITY;
    }
    throw Error(ErrorKind::Data, "line " + std::to_string(line_no) + ": key '" + key + "' is not a number");
}

json score_to_json(double v) {
    if (std::isnan(v)) return "NaN";
    if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
    return v;
}

}  // namespace

std::vector<QualityRecord> parse_manifest(std::string_view text) {
    std::vector<QualityRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) {
            if (end == text.size()) break;
            continue;
        }
        json obj;
        try {
            obj = json::parse(quote_nonfinite_tokens(line));
        } catch (const json::parse_error& e) {
            throw Error(ErrorKind::Data, "line " + std::to_string(line_no) + ": malformed JSON (" + e.what() + ")");
        }
        if (!obj.is_object() || !obj.contains("id") || !obj.contains("mq") || !obj.contains("vq")) {
            throw Error(ErrorKind::Data, "line " + std::to_string(line_no) + ": expected object with id, mq, vq");
        }
        QualityRecord r;
        if (!obj["id"].is_string()) throw Error(ErrorKind::Data, "line " + std::to_string(line_no) + ": id must be a string");
        r.id = obj["id"].get<std::string>();
        r.mq_raw = score_from_json(obj["mq"], "mq", line_no);
        r.vq_raw = score_from_json(obj["vq"], "vq", line_no);
        if (obj.contains("payload")) {
            if (!obj["payload"].is_string()) {
                throw Error(ErrorKind::Data, "line " + std::to_string(line_no) + ": payload must be a string");
            }
            r.payload = obj["payload"].get<std::string>();
        }
        // Curated manifests carry normalized scores alongside the raw ones.
        if (obj.contains("mq_norm") && obj.contains("vq_norm")) {
            r.mq_norm = score_from_json(obj["mq_norm"], "mq_norm", line_no);
            r.vq_norm = score_from_json(obj["vq_norm"], "vq_norm", line_no);
        }
        out.push_back(std::move(r));
        if (end == text.size()) break;
    }
    return out;
}

std::vector<QualityRecord> read_manifest(const std::filesystem::path& path) {
    return parse_manifest(io::read_text(path));
}

std::string format_manifest(std::span<const QualityRecord> records) {
    std::string out;
    for (const auto& r : records) {
        json obj = json::object();
        obj["id"] = r.id;
        obj["mq"] = score_to_json(r.mq_raw);
        obj["vq"] = score_to_json(r.vq_raw);
        if (r.normalized()) {
            obj["mq_norm"] = *r.mq_norm;
            obj["vq_norm"] = *r.vq_norm;
        }
        if (!r.payload.empty()) obj["payload"] = r.payload;
        out += obj.dump();
        out += '\n';
    }
    return out;
}

void write_manifest(const std::filesystem::path& path, std::span<const QualityRecord> records) {
    io::write_text(path, format_manifest(records));
}

NormalizationConstants read_sidecar(const std::filesystem::path& path) {
    json obj;
    try {
        obj = json::parse(io::read_text(path));
        NormalizationConstants c;
        c.mq_min = obj.at("mq_min").get<double>();
        c.mq_max = obj.at("mq_max").get<double>();
        c.vq_min = obj.at("vq_min").get<double>();
        c.vq_max = obj.at("vq_max").get<double>();
        return c;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Data, "bad normalization sidecar " + path.string() + ": " + e.what());
    }
}

void write_sidecar(const std::filesystem::path& path, const NormalizationConstants& c) {
    json obj = {{"mq_min", c.mq_min}, {"mq_max", c.mq_max}, {"vq_min", c.vq_min}, {"vq_max", c.vq_max}};
    io::write_text(path, obj.dump(2) + "\n");
}

std::filesystem::path sidecar_path_for(const std::filesystem::path& manifest) {
    auto p = manifest;
    p += ".norm.json";
    return p;
}

}  // namespace tqd
