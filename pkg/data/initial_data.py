builtin_laws = [
    {
        "name": "rademacher",
        "atoms": [
            {"value": "-1", "prob": "1/2"},
            {"value": "1", "prob": "1/2"}
        ]
    },
    {
        "name": "quad",
        "atoms": [
            {"value": "-2", "prob": 0.1},
            {"value": "-1/2", "prob": 0.4},
            {"value": "1/2", "prob": 0.4},
            {"value": "2", "prob": 0.1}
        ]
    }
]

# laws the checks run over besides the built-in ones; not all of them satisfy the embedding hypotheses
law_corpus = [
    {
        "name": "skewed",  # mean 0, variance 2, third moment nonzero
        "atoms": [
            {"value": "-1", "prob": "2/3"},
            {"value": "2", "prob": "1/3"}
        ]
    },
    {
        "name": "lazy",  # 0 is an atom
        "atoms": [
            {"value": "-1", "prob": 0.5},
            {"value": "0", "prob": 0.25},
            {"value": "1", "prob": 0.25}
        ]
    },
    {
        "name": "four_point",  # mean 0, variance 1, third moment 0, zero excluded
        "atoms": [
            {"value": "-3/2", "prob": "3/16"},
            {"value": "-1/2", "prob": "5/16"},
            {"value": "1/2", "prob": "5/16"},
            {"value": "3/2", "prob": "3/16"}
        ]
    }
]

# increment bags used by the exact path checks, as value -> multiplicity
oracle_bags = [
    {"-1": 2, "1": 2},
    {"-1": 3, "1": 3},
    {"-2": 1, "-1/2": 1, "1/2": 1, "2": 1},
    {"-1/2": 2, "1/2": 1, "2": 1},
    {"1": 2},
    {"-1": 1, "0": 2, "2": 1}
]
