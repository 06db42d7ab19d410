#pragma once

// Line-delimited trajectory files: a header object with the resolved config,
// then one record object per line with a fixed field order. Numbers are
// printed with 17 significant digits so doubles survive a round trip.

#include "ksphere/geometry.hpp"
#include "ksphere/harness/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ksphere::harness {

struct TrajectoryRecord {
    double t = 0.0;
    std::optional<Vec> w;
    std::optional<Vec> z;
    std::optional<Mat> zeta;
    std::optional<Mat> positions;  // d x N; written as N arrays of d
    double znorm = 0.0;
    std::optional<double> min_pair_dot;
    std::optional<double> phi;
    // Norm drift (full) or orthogonality residual of zeta (reduced).
    std::optional<double> drift;

    bool operator==(const TrajectoryRecord&) const;
};

class TrajectoryWriter {
public:
    TrajectoryWriter(std::ostream& out, const ExperimentConfig& cfg);
    void write(const TrajectoryRecord& r);
    // Trailing marker for a run cut short by an integrator failure.
    void write_abort(const std::string& message, double t_last);
    std::size_t records_written() const { return count_; }

private:
    std::ostream& out_;
    std::size_t count_ = 0;
    double last_t_ = 0.0;
    bool has_last_ = false;
};

std::string format_record(const TrajectoryRecord& r);

struct TrajectoryFile {
    std::string version;
    ExperimentConfig config;
    std::vector<TrajectoryRecord> records;
    bool partial = false;
    std::string abort_message;
};

TrajectoryFile read_trajectory(std::istream& in);
TrajectoryFile read_trajectory(const std::string& path);

}  // namespace ksphere::harness
