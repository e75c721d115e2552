#include "qadj/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace qadj::bench {

const char* task_name(Task t)
{
    switch (t) {
        case Task::match2d: return "match2d";
        case Task::match3d: return "match3d";
        case Task::pose2d: return "pose2d";
        case Task::pose3d_ortho: return "pose3d-ortho";
        case Task::pose3d_persp: return "pose3d-persp";
    }
    return "?";
}

std::optional<Task> task_from_name(const std::string& s)
{
    for (Task t : {Task::match2d, Task::match3d, Task::pose2d, Task::pose3d_ortho,
                   Task::pose3d_persp})
        if (s == task_name(t)) return t;
    return std::nullopt;
}

void ExperimentConfig::validate() const
{
    if (trials < 1) throw InvalidArgument("config: trials must be >= 1");
    if (!(noise_sigma >= 0.0)) throw InvalidArgument("config: sigma must be >= 0");
    if (!(spread > 0.0)) throw InvalidArgument("config: spread must be > 0");
    switch (task) {
        case Task::match2d:
        case Task::pose2d:
            if (points < 2) throw InvalidArgument("config: 2D tasks need K >= 2");
            break;
        case Task::match3d:
            if (points < 3) throw InvalidArgument("config: match3d needs K >= 3");
            break;
        case Task::pose3d_ortho:
        case Task::pose3d_persp:
            if (points < 4) throw InvalidArgument("config: 3D pose needs K >= 4");
            break;
    }
    if (task == Task::pose3d_persp) {
        if (camera == CameraConvention::Kind::camera_at_origin) {
            if (!focal || !(*focal > 0.0))
                throw InvalidArgument("config: camera-at-origin needs --focal > 0");
        } else {
            if (!fbar || !(*fbar >= 0.0))
                throw InvalidArgument("config: cloud-at-origin needs --fbar >= 0");
        }
    }
}

PointCloud gen_cloud(int dim, std::size_t k, Rng& rng, double spread)
{
    for (int attempt = 0; attempt < 256; ++attempt) {
        PointCloud c(dim, k);
        for (std::size_t i = 0; i < k; ++i)
            for (int d = 0; d < dim; ++d) c.at(i, d) = rng.uniform_sym(spread);
        if (dim == 1) return c;
        if (dim == 2) {
            double xx = 0, xy = 0, yy = 0;
            for (std::size_t i = 0; i < k; ++i) {
                xx += c.at(i, 0) * c.at(i, 0);
                xy += c.at(i, 0) * c.at(i, 1);
                yy += c.at(i, 1) * c.at(i, 1);
            }
            double d1 = xx * yy - xy * xy;
            if (d1 > 1e-14 * (xx + yy) * (xx + yy)) return c;
        } else {
            Mat3 g;
            for (std::size_t i = 0; i < k; ++i)
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) g(a, b) += c.at(i, a) * c.at(i, b);
            double tg = g(0, 0) + g(1, 1) + g(2, 2);
            if (det(g) > 1e-12 * tg * tg * tg) return c;
        }
    }
    throw DegenerateData("gen_cloud: could not draw a non-degenerate cloud");
}

void apply_noise(PointCloud& pts, double sigma, Rng& rng)
{
    if (sigma == 0.0) return;
    for (double& v : pts.data()) v += sigma * rng.normal();
}

namespace {

void precenter(PointCloud& c)
{
    std::vector<double> mean(std::size_t(c.dim()), 0.0);
    for (std::size_t k = 0; k < c.count(); ++k)
        for (int d = 0; d < c.dim(); ++d) mean[std::size_t(d)] += c.at(k, d);
    for (auto& m : mean) m /= double(c.count());
    for (std::size_t k = 0; k < c.count(); ++k)
        for (int d = 0; d < c.dim(); ++d) c.at(k, d) -= mean[std::size_t(d)];
}

TrialRecord trial_match2d(const ExperimentConfig& cfg, const PointCloud* fixed, Rng& rng,
                          TrialRecord rec)
{
    PointCloud x = fixed ? *fixed : gen_cloud(2, cfg.points, rng, cfg.spread);
    if (cfg.precenter) precenter(x);
    double theta = rng.uniform01() * 2.0 * 3.14159265358979323846;
    Rotation2 rg = rot2_from_angle(theta);
    PointCloud u(2, cfg.points);
    for (std::size_t k = 0; k < cfg.points; ++k) {
        u.at(k, 0) = rg(0, 0) * x.at(k, 0) + rg(0, 1) * x.at(k, 1);
        u.at(k, 1) = rg(1, 0) * x.at(k, 0) + rg(1, 1) * x.at(k, 1);
    }
    apply_noise(u, cfg.noise_sigma, rng);

    Match2Result res = match2d(x, u);
    rec.loss_bi = res.loss;
    rec.loss_gen = match_loss(rg.matrix(), x, u);
    Quat2 qg{std::cos(theta / 2.0), std::sin(theta / 2.0)};
    rec.rot_err_bi = rotation_error(res.q_opt.as_quaternion(), qg.as_quaternion());
    return rec;
}

TrialRecord trial_match3d(const ExperimentConfig& cfg, const PointCloud* fixed, Rng& rng,
                          TrialRecord rec)
{
    PointCloud x = fixed ? *fixed : gen_cloud(3, cfg.points, rng, cfg.spread);
    if (cfg.precenter) precenter(x);
    Quaternion qg = random_unit_quaternion(rng);
    Rotation3 rg = rot3_from_quat(qg);
    PointCloud u(3, cfg.points);
    for (std::size_t k = 0; k < cfg.points; ++k)
        for (int i = 0; i < 3; ++i)
            u.at(k, i) = rg(i, 0) * x.at(k, 0) + rg(i, 1) * x.at(k, 1) + rg(i, 2) * x.at(k, 2);
    apply_noise(u, cfg.noise_sigma, rng);

    Match3Result res = match3d(x, u);
    rec.loss_bi = res.loss;
    rec.loss_gen = match_loss(rg.matrix(), x, u);
    rec.rot_err_bi = rotation_error(res.q_opt, qg);
    return rec;
}

TrialRecord trial_pose2d(const ExperimentConfig& cfg, const PointCloud* fixed, Rng& rng,
                         TrialRecord rec)
{
    PointCloud x = fixed ? *fixed : gen_cloud(2, cfg.points, rng, cfg.spread);
    if (cfg.precenter) precenter(x);
    double theta = rng.uniform01() * 2.0 * 3.14159265358979323846;
    Rotation2 rg = rot2_from_angle(theta);
    PointCloud u(1, cfg.points);
    for (std::size_t k = 0; k < cfg.points; ++k)
        u.at(k, 0) = rg(0, 0) * x.at(k, 0) + rg(0, 1) * x.at(k, 1);
    apply_noise(u, cfg.noise_sigma, rng);

    Pose2Result res = pose2d(x, u);
    rec.loss_bi = res.loss;
    rec.loss_raw = pose2d_loss({res.dets.d2 / res.dets.d1, -res.dets.d3 / res.dets.d1}, x, u);
    rec.loss_gen = pose2d_loss({rg(0, 0), rg(0, 1)}, x, u);
    // recover the half-angle pair from the returned rotation for the error metric
    double half = std::atan2(res.r(1, 0), res.r(0, 0)) / 2.0;
    Quat2 qbi{std::cos(half), std::sin(half)};
    Quat2 qg{std::cos(theta / 2.0), std::sin(theta / 2.0)};
    rec.rot_err_bi = rotation_error(qbi.as_quaternion(), qg.as_quaternion());
    return rec;
}

TrialRecord trial_pose3d_ortho(const ExperimentConfig& cfg, const PointCloud* fixed, Rng& rng,
                               TrialRecord rec)
{
    PointCloud x = fixed ? *fixed : gen_cloud(3, cfg.points, rng, cfg.spread);
    if (cfg.precenter) precenter(x);
    Quaternion qg = random_unit_quaternion(rng);
    Rotation3 rg = rot3_from_quat(qg);
    PointCloud u = ortho_project(rg, x);
    apply_noise(u, cfg.noise_sigma, rng);

    PoseSolution sol = pose3d_ortho(x, u);
    rec.loss_raw = sol.loss_raw;
    rec.loss_bi = sol.loss_bi;
    rec.loss_gen = ortho_pose_loss(rg.matrix(), x, u);
    rec.rot_err_bi = rotation_error(sol.q_opt, qg);
    return rec;
}

TrialRecord trial_pose3d_persp(const ExperimentConfig& cfg, const PointCloud* fixed, Rng& rng,
                               TrialRecord rec)
{
    PointCloud c = fixed ? *fixed : gen_cloud(3, cfg.points, rng, cfg.spread);
    if (cfg.precenter) precenter(c);
    Quaternion qg = random_unit_quaternion(rng);
    Rotation3 rg = rot3_from_quat(qg);

    PointCloud x(3, cfg.points);
    CameraConvention cam = CameraConvention::cloud_at_origin(0.0);
    if (cfg.camera == CameraConvention::Kind::camera_at_origin) {
        // pose the cloud at (0,0,f) in camera coordinates: x = R^T (c + f e3)
        double f = *cfg.focal;
        const Mat3& m = rg.matrix();
        for (std::size_t k = 0; k < cfg.points; ++k) {
            double p[3] = {c.at(k, 0), c.at(k, 1), c.at(k, 2) + f};
            for (int i = 0; i < 3; ++i)
                x.at(k, i) = m(0, i) * p[0] + m(1, i) * p[1] + m(2, i) * p[2];
        }
        cam = CameraConvention::camera_at_origin(f);
    } else {
        x = c;
        cam = CameraConvention::cloud_at_origin(*cfg.fbar);
    }
    PointCloud u = perspective_project(rg, cam, x);
    apply_noise(u, cfg.noise_sigma, rng);

    PoseSolution sol = pose3d_perspective(x, u, cfg.camera);
    // losses are reported at the true focal so rotations are comparable
    rec.loss_raw = perspective_loss(sol.r_tilde, cam, x, u);
    rec.loss_bi = perspective_loss(sol.r_bi.matrix(), cam, x, u);
    rec.loss_gen = perspective_loss(rg.matrix(), cam, x, u);
    rec.rot_err_bi = rotation_error(sol.q_opt, qg);
    rec.focal_est = sol.focal;
    return rec;
}

std::size_t thread_budget(std::size_t trials)
{
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* cap = std::getenv("BENCH_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(cap, &end, 10);
        if (end != cap && v >= 1) n = std::min<std::size_t>(n, std::size_t(v));
    }
    return std::min(n, trials);
}

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::optional<double> mean_of(const std::vector<double>& v)
{
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / double(v.size());
}

std::optional<double> median_of(std::vector<double> v)
{
    if (v.empty()) return std::nullopt;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TrialRecord run_trial_impl(const ExperimentConfig& cfg, std::size_t index,
                           const PointCloud* fixed)
{
    TrialRecord rec;
    rec.trial_index = index;
    Rng rng = Rng::for_trial(cfg.seed, index);
    try {
        switch (cfg.task) {
            case Task::match2d: return trial_match2d(cfg, fixed, rng, rec);
            case Task::match3d: return trial_match3d(cfg, fixed, rng, rec);
            case Task::pose2d: return trial_pose2d(cfg, fixed, rng, rec);
            case Task::pose3d_ortho: return trial_pose3d_ortho(cfg, fixed, rng, rec);
            case Task::pose3d_persp: return trial_pose3d_persp(cfg, fixed, rng, rec);
        }
    } catch (const Error& e) {
        rec.ok = false;
        rec.error = e.what();
    }
    return rec;
}

int reference_dim(Task t)
{
    return (t == Task::match2d || t == Task::pose2d) ? 2 : 3;
}

} // namespace

TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t index)
{
    if (!cfg.cloud_csv.empty()) {
        PointCloud fixed = load_cloud_csv(cfg.cloud_csv);
        if (fixed.dim() != reference_dim(cfg.task))
            throw DimensionError("run_trial: cloud file dimension does not fit the task");
        ExperimentConfig eff = cfg;
        eff.points = fixed.count();
        return run_trial_impl(eff, index, &fixed);
    }
    return run_trial_impl(cfg, index, nullptr);
}

Report run_experiment(const ExperimentConfig& cfg)
{
    ExperimentConfig eff = cfg;
    std::optional<PointCloud> fixed;
    if (!cfg.cloud_csv.empty()) {
        fixed = load_cloud_csv(cfg.cloud_csv);
        if (fixed->dim() != reference_dim(cfg.task))
            throw DimensionError("run_experiment: cloud file dimension does not fit the task");
        eff.points = fixed->count();
    }
    eff.validate();
    const PointCloud* fixed_ptr = fixed ? &*fixed : nullptr;

    Report report;
    report.config = eff;
    report.records.resize(eff.trials);

    std::size_t nthreads = thread_budget(eff.trials);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < eff.trials; ++i)
            report.records[i] = run_trial_impl(eff, i, fixed_ptr);
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (eff.trials + nthreads - 1) / nthreads;
        for (std::size_t t = 0; t < nthreads; ++t) {
            std::size_t lo = t * chunk, hi = std::min(eff.trials, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([&eff, &report, fixed_ptr, lo, hi] {
                for (std::size_t i = lo; i < hi; ++i)
                    report.records[i] = run_trial_impl(eff, i, fixed_ptr);
            });
        }
        for (auto& th : pool) th.join();
    }

    Summary& s = report.summary;
    std::vector<double> raw, bi, gen, err, foc;
    for (const auto& r : report.records) {
        if (!r.ok) {
            ++s.n_failed;
            continue;
        }
        ++s.n_success;
        if (r.loss_raw) raw.push_back(*r.loss_raw);
        if (r.loss_bi) bi.push_back(*r.loss_bi);
        if (r.loss_gen) gen.push_back(*r.loss_gen);
        if (r.rot_err_bi) err.push_back(*r.rot_err_bi);
        if (r.focal_est) foc.push_back(*r.focal_est);
    }
    s.mean_loss_raw = mean_of(raw);
    s.mean_loss_bi = mean_of(bi);
    s.mean_loss_gen = mean_of(gen);
    s.mean_rot_err = mean_of(err);
    s.mean_focal = mean_of(foc);
    s.median_loss_raw = median_of(raw);
    s.median_loss_bi = median_of(bi);
    s.median_loss_gen = median_of(gen);
    s.median_rot_err = median_of(err);
    s.median_focal = median_of(foc);
    s.sorted_loss_bi = bi;
    std::sort(s.sorted_loss_bi.begin(), s.sorted_loss_bi.end());

    if (!eff.output_path.empty()) {
        std::ofstream csv(eff.output_path + ".csv");
        if (!csv) throw Error("run_experiment: cannot open " + eff.output_path + ".csv");
        csv << to_csv(report);
        std::ofstream js(eff.output_path + ".json");
        if (!js) throw Error("run_experiment: cannot open " + eff.output_path + ".json");
        js << to_json(report);
    }
    return report;
}

std::string to_csv(const Report& report)
{
    std::ostringstream out;
    out << "trial,loss_raw,loss_bi,loss_gen,rot_err_bi,focal_est\n";
    auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    for (const auto& r : report.records) {
        out << r.trial_index << ',' << cell(r.loss_raw) << ',' << cell(r.loss_bi) << ','
            << cell(r.loss_gen) << ',' << cell(r.rot_err_bi) << ',' << cell(r.focal_est) << '\n';
    }
    return out.str();
}

std::string to_json(const Report& report)
{
    nlohmann::json j;
    const ExperimentConfig& c = report.config;
    j["task"] = task_name(c.task);
    nlohmann::json jc;
    jc["points"] = c.points;
    jc["trials"] = c.trials;
    jc["noise_sigma"] = c.noise_sigma;
    jc["seed"] = c.seed;
    jc["spread"] = c.spread;
    jc["precenter"] = c.precenter;
    if (c.focal) jc["focal"] = *c.focal;
    if (c.fbar) jc["fbar"] = *c.fbar;
    if (c.task == Task::pose3d_persp)
        jc["camera"] =
            c.camera == CameraConvention::Kind::camera_at_origin ? "origin" : "cloud";
    j["config"] = jc;
    j["n_success"] = report.summary.n_success;
    j["n_failed"] = report.summary.n_failed;

    auto stats = [](const Summary& s, bool mean) {
        nlohmann::json m;
        auto put = [&](const char* key, const std::optional<double>& v) {
            if (v) m[key] = *v;
        };
        if (mean) {
            put("loss_raw", s.mean_loss_raw);
            put("loss_bi", s.mean_loss_bi);
            put("loss_gen", s.mean_loss_gen);
            put("rot_err_bi", s.mean_rot_err);
            put("focal_est", s.mean_focal);
        } else {
            put("loss_raw", s.median_loss_raw);
            put("loss_bi", s.median_loss_bi);
            put("loss_gen", s.median_loss_gen);
            put("rot_err_bi", s.median_rot_err);
            put("focal_est", s.median_focal);
        }
        return m;
    };
    j["mean"] = stats(report.summary, true);
    j["median"] = stats(report.summary, false);
    j["sorted_loss_bi"] = report.summary.sorted_loss_bi;
    return j.dump(2) + "\n";
}

PointCloud load_cloud_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("load_cloud_csv: cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    int dim = -1;
    std::vector<double> data;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        // strip trailing CR and whitespace-only lines
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.empty()) continue;
        if (!saw_header) {
            // header row: x,y[,z] or u[,v]
            saw_header = true;
            dim = int(cells.size());
            if (dim < 1 || dim > 3)
                throw DimensionError("load_cloud_csv: expected 1 to 3 columns, got " +
                                     std::to_string(cells.size()));
            continue;
        }
        if (int(cells.size()) != dim)
            throw ParseError("load_cloud_csv: line " + std::to_string(lineno) +
                             ": expected " + std::to_string(dim) + " columns");
        for (const auto& c : cells) {
            char* end = nullptr;
            double v = std::strtod(c.c_str(), &end);
            if (end == c.c_str() || *end != '\0' || !std::isfinite(v))
                throw ParseError("load_cloud_csv: line " + std::to_string(lineno) +
                                 ": bad numeric token '" + c + "'");
            data.push_back(v);
        }
    }
    if (!saw_header || data.empty())
        throw ParseError("load_cloud_csv: no data rows in " + path);
    return PointCloud::from_rows(dim, data);
}

} // namespace qadj::bench
