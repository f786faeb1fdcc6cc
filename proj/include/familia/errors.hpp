#pragma once

#include <stdexcept>
#include <string>

namespace familia {

// Root of every exception thrown by this library.  All failures carry a
// human-readable message; callers that only want "did it work" can catch
// this single type.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FAMILIA_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(what) {}         \
  }

// Schema / corpus construction.
FAMILIA_DEFINE_ERROR(DuplicateFactorId);
FAMILIA_DEFINE_ERROR(UnknownFactorKind);
FAMILIA_DEFINE_ERROR(NoDiscreteFactor);
FAMILIA_DEFINE_ERROR(NonDenseFactorId);
FAMILIA_DEFINE_ERROR(MalformedLine);
FAMILIA_DEFINE_ERROR(UnknownFactorId);
FAMILIA_DEFINE_ERROR(NonNumericContinuousItem);
FAMILIA_DEFINE_ERROR(MissingSupervisedSignal);
FAMILIA_DEFINE_ERROR(UnexpectedSupervisedSignal);

// Model state and persistence.
FAMILIA_DEFINE_ERROR(InvalidConfig);
FAMILIA_DEFINE_ERROR(UnknownDocument);
FAMILIA_DEFINE_ERROR(NotADiscreteFactor);
FAMILIA_DEFINE_ERROR(NotAContinuousFactor);
FAMILIA_DEFINE_ERROR(TopicOutOfRange);
FAMILIA_DEFINE_ERROR(InconsistentCounts);
FAMILIA_DEFINE_ERROR(VersionMismatch);
FAMILIA_DEFINE_ERROR(CorruptFile);
FAMILIA_DEFINE_ERROR(IoFailure);

// Sampling machinery.
FAMILIA_DEFINE_ERROR(AllZeroWeights);
FAMILIA_DEFINE_ERROR(NegativeWeight);
FAMILIA_DEFINE_ERROR(NonFiniteWeight);
FAMILIA_DEFINE_ERROR(NonFiniteRatio);
FAMILIA_DEFINE_ERROR(MalformedSchedule);

// Distances and scoring.
FAMILIA_DEFINE_ERROR(UnsupportedSupport);
FAMILIA_DEFINE_ERROR(ZeroVector);
FAMILIA_DEFINE_ERROR(NonFiniteInput);
FAMILIA_DEFINE_ERROR(DimensionMismatch);
FAMILIA_DEFINE_ERROR(EmptyQueryAfterFilter);

#undef FAMILIA_DEFINE_ERROR

}  // namespace familia
