#pragma once

#include "causalsem/data.hpp"
#include "causalsem/graph.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace causalsem {

struct CiTestResult {
    double statistic = 0.0;
    double p_value = 1.0;
    /// Conditioning-set size for Fisher-z and the oracle, degrees of freedom for G-squared.
    double dof_or_condsize = 0.0;
    bool independent = true;
    /// |partial r| reached 1 (Fisher-z) or every stratum was empty (G-squared).
    bool saturated = false;
    std::string warning;
};

/// Raised when a conditioning submatrix cannot be inverted.
class SingularConditioningError : public std::runtime_error {
public:
    SingularConditioningError(const std::string& what, std::vector<std::size_t> conditioning_set)
        : std::runtime_error(what), conditioning_set_(std::move(conditioning_set)) {}
    const std::vector<std::size_t>& conditioning_set() const { return conditioning_set_; }

private:
    std::vector<std::size_t> conditioning_set_;
};

/// One line of the JSON-lines audit log.
struct CiLogEntry {
    std::size_t x = 0, y = 0;
    std::vector<std::size_t> z;
    CiTestResult result;
};

class CiTestLog {
public:
    void record(std::size_t x, std::size_t y, const std::vector<std::size_t>& z, const CiTestResult& r) {
        entries_.push_back({x, y, z, r});
    }
    const std::vector<CiLogEntry>& entries() const { return entries_; }
    std::string to_json_lines(const std::vector<std::string>& names, double alpha) const;

private:
    std::vector<CiLogEntry> entries_;
};

/// Conditional-independence test over variables 0..size()-1.
class IndependenceTest {
public:
    virtual ~IndependenceTest() = default;
    virtual CiTestResult test(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const = 0;
    virtual const std::vector<std::string>& names() const = 0;
    virtual std::string method() const = 0;
    std::size_t size() const { return names().size(); }
    double alpha() const { return alpha_; }

    /// Runs the test and appends to the attached log, if any.
    CiTestResult operator()(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const;
    void attach_log(CiTestLog* log) { log_ = log; }
    std::size_t calls() const { return calls_; }

protected:
    explicit IndependenceTest(double alpha) : alpha_(alpha) {}

private:
    double alpha_;
    CiTestLog* log_ = nullptr;
    mutable std::size_t calls_ = 0;
};

/// Partial correlation of x and y given z from the inverse of the (x, y, z) submatrix.
/// Throws SingularConditioningError when the submatrix is singular or its
/// condition number exceeds 1e10.
double partial_correlation(const CorrelationMatrix& c, std::size_t x, std::size_t y, const std::vector<std::size_t>& z);

CiTestResult fisher_z_test(const CorrelationMatrix& c, std::size_t x, std::size_t y, const std::vector<std::size_t>& z,
                           double alpha);

CiTestResult g_squared_test(const Dataset& d, std::size_t x, std::size_t y, const std::vector<std::size_t>& z,
                            double alpha);

class FisherZTest final : public IndependenceTest {
public:
    FisherZTest(CorrelationMatrix c, double alpha);
    CiTestResult test(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const override;
    const std::vector<std::string>& names() const override { return corr_.names; }
    std::string method() const override { return "fisher-z"; }
    const CorrelationMatrix& correlation() const { return corr_; }

private:
    CorrelationMatrix corr_;
};

class GSquaredTest final : public IndependenceTest {
public:
    GSquaredTest(Dataset d, double alpha);
    CiTestResult test(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const override;
    const std::vector<std::string>& names() const override { return names_; }
    std::string method() const override { return "g-squared"; }

private:
    Dataset data_;
    std::vector<std::string> names_;
};

/// Exact test from d-separation in a known DAG. With `observed` given, the test
/// ranges over those nodes only (the rest are latent).
class OracleTest final : public IndependenceTest {
public:
    explicit OracleTest(MixedGraph dag, std::vector<std::string> observed = {});
    CiTestResult test(std::size_t x, std::size_t y, const std::vector<std::size_t>& z) const override;
    const std::vector<std::string>& names() const override { return observed_; }
    std::string method() const override { return "d-separation oracle"; }

private:
    MixedGraph dag_;
    std::vector<std::string> observed_;
    std::vector<std::size_t> to_dag_;
};

std::unique_ptr<OracleTest> oracle_ci(const MixedGraph& dag, std::vector<std::string> observed = {});

}  // namespace causalsem
