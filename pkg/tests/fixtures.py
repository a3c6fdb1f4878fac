"""Illustrative uniforms from the worked SRS examples, in printed column order."""

MAY_SRS = {
    "aasdfd": 0.995,
    "Ok asd": 0.992,
    "what is bing": 0.99,
    "Why use bing not gogle": 0.989,
    "catastro": 0.988,
    "Who killed jdsdf": 0.987,
    "need 1 more query": 0.985,
}

# June, stable: May numbers carried over, one new query
JUNE_STABLE = {
    "what is bing": 0.99,
    "Why use bing not gogle": 0.989,
    "catastro": 0.988,
    "new query in June": 0.9875,
    "Who killed jdsdf": 0.987,
}

# June, semi-stable: "Another query" and "catastro" were regenerated
JUNE_SEMISTABLE = {
    "what is bing": 0.99,
    "Another query": 0.9893,
    "Why use bing not gogle": 0.989,
    "catastro": 0.45,
    "new query in June": 0.9875,
}
