#ifndef LTVGAP_LTVGAP_HPP
#define LTVGAP_LTVGAP_HPP

#include "ltvgap/signal_space.hpp"
#include "ltvgap/operator.hpp"
#include "ltvgap/lift.hpp"
#include "ltvgap/flatten.hpp"
#include "ltvgap/nehari.hpp"
#include "ltvgap/coprime.hpp"
#include "ltvgap/gap.hpp"
#include "ltvgap/margin.hpp"
#include "ltvgap/synthesis.hpp"

#endif  // LTVGAP_LTVGAP_HPP
