#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qadj/match.hpp"
#include "qadj/pose.hpp"
#include "qadj/rng.hpp"

namespace qadj::bench {

enum class Task { match2d, match3d, pose2d, pose3d_ortho, pose3d_persp };

const char* task_name(Task t);
std::optional<Task> task_from_name(const std::string& s);

struct ExperimentConfig {
    Task task = Task::match3d;
    std::size_t points = 50;
    std::size_t trials = 100;
    double noise_sigma = 0.0;
    std::optional<double> focal;          // camera-at-origin focal length
    std::optional<double> fbar;           // cloud-at-origin inverse focal length
    CameraConvention::Kind camera = CameraConvention::Kind::camera_at_origin;
    std::uint64_t seed = 0;
    std::string output_path;              // stem; .csv / .json appended
    double spread = 1.0;                  // cloud half-width; perspective default 0.5
    bool precenter = false;
    std::string cloud_csv;                // optional fixed reference cloud (CSV)

    void validate() const; // throws InvalidArgument
    static double default_spread(Task t) { return t == Task::pose3d_persp ? 0.5 : 1.0; }
};

struct TrialRecord {
    std::size_t trial_index = 0;
    bool ok = true;
    std::string error; // failure reason when !ok
    std::optional<double> loss_raw;
    std::optional<double> loss_bi;
    std::optional<double> loss_gen;
    std::optional<double> rot_err_bi;
    std::optional<double> focal_est;
};

struct Summary {
    std::size_t n_success = 0;
    std::size_t n_failed = 0;
    std::optional<double> mean_loss_raw, mean_loss_bi, mean_loss_gen, mean_rot_err, mean_focal;
    std::optional<double> median_loss_raw, median_loss_bi, median_loss_gen, median_rot_err,
        median_focal;
    std::vector<double> sorted_loss_bi;
};

struct Report {
    ExperimentConfig config;
    std::vector<TrialRecord> records;
    Summary summary;
};

// Uniform i.i.d. cloud in a cube of half-width `spread`, centered at the
// origin; re-sampled while the reference Gram determinant is degenerate.
PointCloud gen_cloud(int dim, std::size_t k, Rng& rng, double spread);

// Adds i.i.d. zero-mean Gaussian jitter to every coordinate.
void apply_noise(PointCloud& pts, double sigma, Rng& rng);

// Runs one trial of the configured task; deterministic given (seed, index).
TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t index);

// Runs all trials (parallel across trials; BENCH_THREADS caps the pool),
// assembles the summary, and writes <output_path>.csv and <output_path>.json
// when output_path is nonempty.
Report run_experiment(const ExperimentConfig& cfg);

std::string to_csv(const Report& report);
std::string to_json(const Report& report);

// CSV with header "x,y[,z]" or "u[,v]"; one point per row; dimension inferred
// from the column count.  Throws ParseError with the offending line number.
PointCloud load_cloud_csv(const std::string& path);

} // namespace qadj::bench
