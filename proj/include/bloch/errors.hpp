#ifndef BLOCH_ERRORS_HPP
#define BLOCH_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bloch {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// numkernel
struct NotHermitian : Error {
    explicit NotHermitian(const std::string& msg) : Error(msg) {}
};
struct MassNotSpd : Error {
    explicit MassNotSpd(const std::string& msg) : Error(msg) {}
};
struct NonFiniteInput : Error {
    explicit NonFiniteInput(const std::string& msg) : Error(msg) {}
};

// affine
struct ExponentOverflow : Error {
    explicit ExponentOverflow(const std::string& msg) : Error(msg) {}
};

// solver1d
struct InvalidProfile : Error {
    explicit InvalidProfile(const std::string& msg) : Error(msg) {}
};
struct RootScanExhausted : Error {
    explicit RootScanExhausted(const std::string& msg) : Error(msg) {}
};
struct EigenvectorDefect : Error {
    explicit EigenvectorDefect(const std::string& msg) : Error(msg) {}
};

// solver2d
struct ParseError : Error {
    ParseError(const std::string& msg, long line) : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};
struct UnpairedBoundaryNode : Error {
    explicit UnpairedBoundaryNode(const std::string& msg) : Error(msg) {}
};
struct DegenerateTriangle : Error {
    explicit DegenerateTriangle(const std::string& msg) : Error(msg) {}
};

// nwidth
struct FitRangeEmpty : Error {
    explicit FitRangeEmpty(const std::string& msg) : Error(msg) {}
};

// greedy
struct Stagnation : Error {
    explicit Stagnation(const std::string& msg) : Error(msg) {}
};
struct IndicatorCollapse : Error {
    explicit IndicatorCollapse(const std::string& msg) : Error(msg) {}
};

// spectral
struct ClusterBoundaryDegenerate : Error {
    explicit ClusterBoundaryDegenerate(const std::string& msg) : Error(msg) {}
};

// cli
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

} // namespace bloch

#endif
