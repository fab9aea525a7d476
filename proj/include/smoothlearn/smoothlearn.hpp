#pragma once

#include "smoothlearn/adversary.hpp"
#include "smoothlearn/bounds.hpp"
#include "smoothlearn/errors.hpp"
#include "smoothlearn/harness.hpp"
#include "smoothlearn/io.hpp"
#include "smoothlearn/learner.hpp"
#include "smoothlearn/pwl.hpp"
