#pragma once

#include <doctest.h>

#include "cmx/error.hpp"

// Asserts that `expr` throws cmx::Error carrying `error_code`.
#define CHECK_THROWS_CODE(expr, error_code)                                                                  \
    do {                                                                                                     \
        bool thrown_ = false;                                                                                \
        try {                                                                                                \
            (void)(expr);                                                                                    \
        } catch (const cmx::Error &e_) {                                                                     \
            thrown_ = true;                                                                                  \
            CHECK_MESSAGE(e_.code() == (error_code), "got " << cmx::to_string(e_.code()));                   \
        }                                                                                                    \
        CHECK_MESSAGE(thrown_, "expected " << cmx::to_string(error_code));                                   \
    } while (false)
