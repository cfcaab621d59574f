# -*- coding: utf-8 -*-
import math

# Numerical tolerances
TOLERANCES = {
    'row_sum': 1e-12,        # DMC rows must sum to 1 within this
    'capacity': 1e-9,        # Blahut-Arimoto upper/lower gap
    'compound_capacity': 1e-9,
    'region': 1e-9,          # Tuncel membership margin
    'series_tail': 1e-14,    # geometric series truncation
    'tie': 1e-9,             # log-likelihoods this close count as tied
}

ITERATION_CAPS = {
    'blahut_arimoto': 100000,
    'compound_outer': 5000,
    'nelder_mead': 2000,
}

SCHEME_DEFAULTS = {
    'kappa_max': 10.0,             # cap for T_c/B when not finite
    'slack_exponent': 0.25,        # delta(m) = m ** -slack_exponent
    'backoff': 1.0,                # message backoff factor, times n ** -1/4
    'max_epochs': 10000,
    'max_explicit_codewords': 1024,
}

GRID_DEFAULTS = {
    'phi_grid_size': 199,
    'simplex_resolution': 200,     # output simplex grid for region checks
    'input_simplex_resolution': 60,  # compound capacity grid for |X| <= 4
    'max_region_grid_points': 2000000,
}

ENUMERATION_LIMITS = {
    'max_sequences': 2 ** 16,      # |Y| ** (phase length)
    'max_compound_messages': 2 ** 16,
}

MONTE_CARLO_DEFAULTS = {
    'sessions': 10000,
    'seed': 1,
    'chunk_size': 256,
    'codebook_stream': 2 ** 31,
}

# Process exit codes of the command line tool
EXIT_CODES = {
    'ok': 0,
    'numeric': 1,
    'config': 2,
    'runaway': 3,
    'capability': 4,
}

SEED_ENVIRONMENT_VARIABLE = 'COMPOUND_SIM_SEED'

LOG2E = 1.0 / math.log(2.0)
