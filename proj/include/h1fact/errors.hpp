#pragma once

#include <stdexcept>
#include <string>

namespace h1fact {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// resource-style failures (CLI maps these to exit code 3)
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

class CellBudgetExceeded : public BudgetExceeded {
public:
    using BudgetExceeded::BudgetExceeded;
};

class LatticeMismatch : public Error {
public:
    using Error::Error;
};

class IncompatibleGrids : public Error {
public:
    using Error::Error;
};

class MisalignedRect : public Error {
public:
    using Error::Error;
};

class OutOfExtent : public Error {
public:
    using Error::Error;
};

class PointTooCloseToSupport : public Error {
public:
    using Error::Error;
};

class ZeroFunction : public Error {
public:
    using Error::Error;
};

class MeanNotZero : public Error {
public:
    using Error::Error;
};

class PreconditionViolated : public Error {
public:
    using Error::Error;
};

} // namespace h1fact
