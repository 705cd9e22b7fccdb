#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vecq::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumeric = 4 };

enum class Method { VecQ, IterativeL2, SignBinary, LinearRound };

struct LambdaMode {
    enum class Kind { Template, Empirical, Fixed } kind = Kind::Template;
    double value = 0.0;  // only for Fixed
};

struct QuantizerSpec {
    Method method = Method::VecQ;
    int bits = 2;
    LambdaMode lambda_mode;
};

Method parse_method(const std::string& text);
std::string method_name(Method method);
LambdaMode parse_lambda_mode(const std::string& text);
// Forces k = 1 for sign-binary; rejects invalid bit/method combinations.
QuantizerSpec make_spec(Method method, int bits, LambdaMode mode);

// Worker count for parallel commands, capped by VECQ_THREADS.
unsigned thread_budget();

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vecq::cli
