#pragma once

#include <stdexcept>
#include <string>

namespace nekstab {

/// Enumeration or work cap exceeded (resonance search, Farey scans).
class resource_error : public std::runtime_error {
public:
    explicit resource_error(const std::string& what) : std::runtime_error(what) {}
};

/// Implicit solver failed to contract within the configured iteration cap.
class step_error : public std::runtime_error {
public:
    step_error(const std::string& what, double t, int iters, double delta)
        : std::runtime_error(what), time(t), iterations(iters), last_delta(delta) {}

    double time;
    int iterations;
    double last_delta;
};

} // namespace nekstab
