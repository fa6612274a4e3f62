#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "egoflow/geometry.hpp"
#include "egoflow/synthetic.hpp"

namespace egoflow::test {

inline double relative_error(const Twist& est, const Twist& truth) {
    return (est.stacked() - truth.stacked()).norm() / truth.stacked().norm();
}

inline Twist random_twist(std::mt19937_64& rng, double v_scale = 1.0, double w_scale = 0.02) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Twist t;
    t.v = Eigen::Vector3d(0.3 * u(rng), 0.1 * u(rng), 0.65 + 0.35 * u(rng)) * v_scale;
    t.omega = Eigen::Vector3d(u(rng), u(rng), u(rng)) * w_scale;
    return t;
}

inline StereoRig random_rig(std::mt19937_64& rng, int width, int height) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    StereoRig rig;
    rig.intrinsics.width = width;
    rig.intrinsics.height = height;
    rig.intrinsics.f = width * (0.4 + 0.8 * u(rng));
    rig.intrinsics.cx = width * (0.4 + 0.2 * u(rng));
    rig.intrinsics.cy = height * (0.4 + 0.2 * u(rng));
    rig.baseline = 0.2 + 0.6 * u(rng);
    return rig;
}

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("egoflow_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string operator/(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

// Sets EGOFLOW_THREADS for the lifetime of the guard.
class ThreadsEnv {
public:
    explicit ThreadsEnv(int threads) {
        if (const char* old = std::getenv("EGOFLOW_THREADS")) old_ = old;
        ::setenv("EGOFLOW_THREADS", std::to_string(threads).c_str(), 1);
    }
    ~ThreadsEnv() {
        if (old_.empty())
            ::unsetenv("EGOFLOW_THREADS");
        else
            ::setenv("EGOFLOW_THREADS", old_.c_str(), 1);
    }

private:
    std::string old_;
};

}  // namespace egoflow::test
