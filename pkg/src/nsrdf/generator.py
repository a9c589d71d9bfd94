"""Deterministic Twitter-like social graph generator.

Every triple is owned by exactly one user, and per-user emission is bounded:

    type 1, name 1, knows 1..8, posts 3..4 x (type, creator_of, content,
    created, container_of, at most one hashtag), replies 1..3 x (type,
    creator_of, content, created, reply_of, at most one hashtag), likes
    0..5 on posts or replies, membership 1, forum moderation 0 or 2

so a graph of ``n`` users holds between 24n and 60n triples, inside the
advertised [20n, 60n] envelope. No triple is generated twice.
"""

from __future__ import annotations

import random

from .rdf import Dataset, Term

NS = "http://example.org/social/"
RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
FOAF = "http://xmlns.com/foaf/0.1/"
SIOC = "http://rdfs.org/sioc/ns#"
SIB = "http://www.ins.cwi.nl/sib/vocabulary/"
DC = "http://purl.org/dc/terms/"
XSD_DATE = "http://www.w3.org/2001/XMLSchema#date"

TYPE = RDF_TYPE
KNOWS = FOAF + "knows"
NAME = FOAF + "name"
CREATOR_OF = SIOC + "creator_of"
CONTENT = SIOC + "content"
CONTAINER_OF = SIOC + "container_of"
REPLY_OF = SIOC + "reply_of"
MODERATOR_OF = SIOC + "moderator_of"
CREATED = DC + "created"
HASHTAG = SIB + "hashtag"
LIKED_BY = SIB + "liked_by"
MEMB = SIB + "memb"

USER = SIB + "User"
POST = SIOC + "Post"
ITEM = SIOC + "Item"
FORUM = SIOC + "Forum"

FORUM_SIZE = 20
N_TAGS = 50


def _zipf(rng: random.Random, low: int, high: int, skew: float = 1.3) -> int:
    weights = [1.0 / (k - low + 1) ** skew for k in range(low, high + 1)]
    return rng.choices(range(low, high + 1), weights)[0]


def generate_social(seed: int, users: int) -> Dataset:
    if users < 2:
        raise ValueError("need at least two users")
    rng = random.Random(seed)
    ds = Dataset()
    iri = Term.iri

    def add(s, p, o):
        ds.add(iri(s), iri(p), o if isinstance(o, Term) else iri(o))

    user = [f"{NS}user{i}" for i in range(users)]
    n_forums = (users + FORUM_SIZE - 1) // FORUM_SIZE
    forum = [f"{NS}forum{i}" for i in range(n_forums)]
    tags = [f"http://dbpedia.org/resource/Tag{i}" for i in range(N_TAGS)]
    tag_weights = [1.0 / (k + 1) for k in range(N_TAGS)]
    items: list[str] = []
    # one slot per item plus one per reply or like received: uniform draws are preferential
    post_attention: list[int] = []
    item_attention: list[int] = []

    for u in range(users):
        me = user[u]
        home = forum[u // FORUM_SIZE]
        add(me, TYPE, USER)
        add(me, NAME, Term.literal(f"User {u}"))
        add(home, MEMB, me)
        if u % FORUM_SIZE == 0:
            add(home, TYPE, FORUM)
            add(me, MODERATOR_OF, home)

        k = min(_zipf(rng, 1, 8), users - 1)
        # preferential targets: low user ids act as hubs
        friends = set()
        while len(friends) < k:
            v = min(int(rng.paretovariate(0.8)) - 1, users - 1) if rng.random() < 0.5 else rng.randrange(users)
            if v != u:
                friends.add(v)
        for v in sorted(friends):
            add(me, KNOWS, user[v])

        for j in range(rng.randint(3, 4)):
            post = f"{NS}post{u}_{j}"
            add(post, TYPE, POST)
            add(me, CREATOR_OF, post)
            add(post, CONTENT, Term.literal(f"post {u}.{j}"))
            add(post, CREATED, Term.literal(f"2016-{1 + rng.randrange(12):02d}-{1 + rng.randrange(28):02d}",
                                            datatype=XSD_DATE))
            add(home, CONTAINER_OF, post)
            if rng.random() < 0.4:
                add(post, HASHTAG, rng.choices(tags, tag_weights)[0])
            post_attention.append(len(items))
            item_attention.append(len(items))
            items.append(post)

        for j in range(rng.randint(1, 3)):
            reply = f"{NS}reply{u}_{j}"
            add(reply, TYPE, ITEM)
            add(me, CREATOR_OF, reply)
            add(reply, CONTENT, Term.literal(f"reply {u}.{j}"))
            add(reply, CREATED, Term.literal(f"2016-{1 + rng.randrange(12):02d}-{1 + rng.randrange(28):02d}",
                                             datatype=XSD_DATE))
            target = rng.choice(post_attention)
            post_attention.append(target)
            item_attention.append(target)
            add(reply, REPLY_OF, items[target])
            if rng.random() < 0.15:
                add(reply, HASHTAG, rng.choices(tags, tag_weights)[0])
            item_attention.append(len(items))
            items.append(reply)

        n_likes = min(rng.randint(0, 5), len(items))
        liked = set()
        while len(liked) < n_likes:
            liked.add(rng.choice(item_attention))
        for i in sorted(liked):
            item_attention.append(i)
            add(items[i], LIKED_BY, me)
    return ds
