#pragma once

#include <stdexcept>
#include <string>

namespace cgc {

// Base type for every recoverable error raised by the pipeline.
class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

#define CGC_ERROR_TYPE(Name)                                          \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(std::string msg) : Error(std::move(msg)) {}    \
    }

// asm ingestion
CGC_ERROR_TYPE(MalformedLine);
CGC_ERROR_TYPE(EmptyInstruction);
CGC_ERROR_TYPE(ExternalFunction);
CGC_ERROR_TYPE(EmptyCorpus);

// numeric core
CGC_ERROR_TYPE(DimensionMismatch);
CGC_ERROR_TYPE(EmptySequence);
CGC_ERROR_TYPE(NonFiniteLoss);
CGC_ERROR_TYPE(TooFewPoints);
CGC_ERROR_TYPE(MissingEmbedding);
CGC_ERROR_TYPE(UnknownLabel);
CGC_ERROR_TYPE(ZeroDiagonal);
CGC_ERROR_TYPE(SingleClassInput);
CGC_ERROR_TYPE(DegenerateLabels);

// pipeline
CGC_ERROR_TYPE(FamilyTooSmall);
CGC_ERROR_TYPE(FingerprintMismatch);
CGC_ERROR_TYPE(UnparsableFile);
CGC_ERROR_TYPE(InvalidSpec);
CGC_ERROR_TYPE(InvalidReport);
CGC_ERROR_TYPE(UnwritablePath);
CGC_ERROR_TYPE(IoError);
CGC_ERROR_TYPE(ConfigError);

#undef CGC_ERROR_TYPE

}  // namespace cgc
