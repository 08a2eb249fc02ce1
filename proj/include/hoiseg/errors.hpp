// Copyright 2026 The hoiseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hoiseg {

// Bad input data or configuration. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files. Maps to CLI exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A postcondition the library guarantees did not hold. Maps to CLI exit code 3.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class TraceParseError : public ValidationError {
public:
    TraceParseError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class UnknownCropRef : public ValidationError {
public:
    explicit UnknownCropRef(const std::string& ref)
        : ValidationError("unknown crop_ref '" + ref + "'"), ref_(ref) {}

    const std::string& ref() const noexcept { return ref_; }

private:
    std::string ref_;
};

// Raised when one side of a clip pair has no active-object crops to compare.
class NoCropsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hoiseg
