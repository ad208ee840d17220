// Translation unit anchoring the shared test helpers.
#include "test_support.hpp"
