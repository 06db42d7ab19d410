#include "ksphere/harness/trajectory_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace ksphere::harness {

using json = nlohmann::json;

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

bool same_bits(const Mat& a, const Mat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    return a.size() == 0 || std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
}

template <class T>
bool same_opt(const std::optional<T>& a, const std::optional<T>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || same_bits(*a, *b);
}

void put_number(std::string& s, double x) {
    if (!std::isfinite(x)) throw IntegrationFailure("trajectory record holds a non-finite value");
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    s += buf;
}

void put_vec(std::string& s, const Vec& v) {
    s += '[';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        put_number(s, v(i));
    }
    s += ']';
}

// Columns as arrays.
void put_columns(std::string& s, const Mat& m) {
    s += '[';
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (j) s += ',';
        put_vec(s, m.col(j));
    }
    s += ']';
}

void put_key(std::string& s, const char* key) {
    s += ",\"";
    s += key;
    s += "\":";
}

Vec read_vec(const json& a) {
    Vec v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

Mat read_columns(const json& a) {
    if (a.empty()) return Mat(0, 0);
    const auto rows = static_cast<Eigen::Index>(a[0].size());
    Mat m(rows, static_cast<Eigen::Index>(a.size()));
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (static_cast<Eigen::Index>(a[j].size()) != rows) throw InvalidInput("trajectory: ragged matrix");
        m.col(static_cast<Eigen::Index>(j)) = read_vec(a[j]);
    }
    return m;
}

}  // namespace

bool TrajectoryRecord::operator==(const TrajectoryRecord& o) const {
    return same_bits(t, o.t) && same_opt(w, o.w) && same_opt(z, o.z) && same_opt(zeta, o.zeta) &&
           same_opt(positions, o.positions) && same_bits(znorm, o.znorm) && same_opt(min_pair_dot, o.min_pair_dot) &&
           same_opt(phi, o.phi) && same_opt(drift, o.drift);
}

std::string format_record(const TrajectoryRecord& r) {
    std::string s = "{\"t\":";
    put_number(s, r.t);
    if (r.w) {
        put_key(s, "w");
        put_vec(s, *r.w);
    }
    if (r.z) {
        put_key(s, "z");
        put_vec(s, *r.z);
    }
    if (r.zeta) {
        put_key(s, "zeta");
        put_columns(s, *r.zeta);
    }
    if (r.positions) {
        put_key(s, "positions");
        put_columns(s, *r.positions);
    }
    put_key(s, "Znorm");
    put_number(s, r.znorm);
    if (r.min_pair_dot) {
        put_key(s, "min_pair_dot");
        put_number(s, *r.min_pair_dot);
    }
    if (r.phi) {
        put_key(s, "phi");
        put_number(s, *r.phi);
    }
    if (r.drift) {
        put_key(s, "drift");
        put_number(s, *r.drift);
    }
    s += '}';
    return s;
}

TrajectoryWriter::TrajectoryWriter(std::ostream& out, const ExperimentConfig& cfg) : out_(out) {
    // The output path is left out so the file content depends only on the run.
    ExperimentConfig resolved = cfg;
    resolved.output.clear();
    out_ << "{\"type\":\"header\",\"version\":\"" << kVersion << "\",\"config\":" << to_json(resolved) << "}\n";
}

void TrajectoryWriter::write(const TrajectoryRecord& r) {
    // t is monotone in the direction of integration; equal times are a bug.
    if (has_last_ && r.t == last_t_) throw InvalidInput("trajectory: repeated time");
    out_ << format_record(r) << '\n';
    last_t_ = r.t;
    has_last_ = true;
    ++count_;
}

void TrajectoryWriter::write_abort(const std::string& message, double t_last) {
    std::string s = "{\"type\":\"abort\",\"partial\":true,\"t_last\":";
    put_number(s, t_last);
    s += ",\"message\":" + json(message).dump() + "}";
    out_ << s << '\n';
}

TrajectoryFile read_trajectory(std::istream& in) {
    TrajectoryFile f;
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("trajectory: empty file");
    const json header = json::parse(line);
    if (header.value("type", "") != "header") throw InvalidInput("trajectory: first line is not a header");
    f.version = header.at("version").get<std::string>();
    f.config = parse_config(header.at("config").dump());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (j.contains("type")) {
            if (j["type"] == "abort") {
                f.partial = true;
                f.abort_message = j.value("message", "");
                continue;
            }
            throw InvalidInput("trajectory: unexpected line type");
        }
        TrajectoryRecord r;
        r.t = j.at("t").get<double>();
        if (j.contains("w")) r.w = read_vec(j["w"]);
        if (j.contains("z")) r.z = read_vec(j["z"]);
        if (j.contains("zeta")) r.zeta = read_columns(j["zeta"]);
        if (j.contains("positions")) r.positions = read_columns(j["positions"]);
        r.znorm = j.at("Znorm").get<double>();
        if (j.contains("min_pair_dot")) r.min_pair_dot = j["min_pair_dot"].get<double>();
        if (j.contains("phi")) r.phi = j["phi"].get<double>();
        if (j.contains("drift")) r.drift = j["drift"].get<double>();
        f.records.push_back(std::move(r));
    }
    return f;
}

TrajectoryFile read_trajectory(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("trajectory: cannot open '" + path + "'");
    return read_trajectory(in);
}

}  // namespace ksphere::harness
