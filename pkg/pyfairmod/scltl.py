"""Co-safe LTL formulas, finite-word semantics and translation to DFAs.

Formulas are immutable trees of Formula nodes. Negation appears only directly on atoms.
DFAs are built by formula progression: every state is a normalized residual formula,
and the accepting state is the residual that is satisfied by every continuation.

Concrete syntax, tightest binding first: `!`, `X`/`F` (prefix), `U` (right associative),
`&`, `|`, with parentheses, `true`, `false` and proposition identifiers.

Classes
-------
Formula
    Immutable scLTL syntax tree node
Dfa
    Deterministic finite automaton with absorbing accepting states

Functions
---------
parse_formula()
    Parses formula text into a Formula
formula_to_string()
    Prints a formula in re-parseable concrete syntax
formula_propositions()
    Collects the propositions a formula mentions
evaluate_finite()
    Strong finite-trace satisfaction of a formula by a word
progress()
    Single normalized progression step of a formula over one symbol
translate_to_dfa()
    Builds the DFA whose language is exactly the satisfying words
dfa_step()
    DFA transition lookup
instantiate_pattern()
    Builds one of the pick-up and drop-off request patterns
"""

import re
import itertools
from dataclasses import dataclass

import pyfairmod.errors as ERRORS


KIND_TRUE       = 'true'
KIND_FALSE      = 'false'
KIND_ATOM       = 'atom'
KIND_NEG_ATOM   = 'negated-atom'
KIND_AND        = 'and'
KIND_OR         = 'or'
KIND_NEXT       = 'next'
KIND_UNTIL      = 'until'
KIND_EVENTUALLY = 'eventually'

# Residual reached once the consumed prefix satisfies the formula. Only produced by progression.
KIND_SATISFIED  = 'satisfied'

DEFAULT_MAX_STATES = 10000

PATTERN_ARITY = {
    'seq2':     2,
    'alt-then': 3,
    'then-alt': 3,
}

PATTERN_ALIASES = {
    'phi1': 'seq2',
    'phi2': 'alt-then',
    'phi3': 'then-alt',
}

_PROPOSITION_RE = re.compile(r'^[A-Za-z0-9_][A-Za-z0-9_.:\-]*$')
_TOKEN_RE       = re.compile(r'\s*(?:(?P<op>[!&|()])|(?P<ident>[A-Za-z0-9_][A-Za-z0-9_.:\-]*))')
_KEYWORDS       = ('X', 'F', 'U', 'true', 'false')


@dataclass(frozen=True)
class Formula:
    """Immutable scLTL syntax tree node

    Attributes
    ----------
    kind : str
        One of the KIND_* constants
    children : tuple of Formula
        Two children for and/or/until, one for next/eventually, none otherwise
    name : str
        Proposition name for atoms and negated atoms, None otherwise
    """

    kind: str
    children: tuple = ()
    name: str = None

    def __str__(self):
        return formula_to_string(self)


TRUE      = Formula(KIND_TRUE)
FALSE     = Formula(KIND_FALSE)
SATISFIED = Formula(KIND_SATISFIED)


def atom(name):
    return Formula(KIND_ATOM, name=name)


def negated_atom(name):
    return Formula(KIND_NEG_ATOM, name=name)


def conj(left, right):
    return Formula(KIND_AND, (left, right))


def disj(left, right):
    return Formula(KIND_OR, (left, right))


def next_(child):
    return Formula(KIND_NEXT, (child,))


def eventually(child):
    return Formula(KIND_EVENTUALLY, (child,))


def until(left, right):
    return Formula(KIND_UNTIL, (left, right))


def is_valid_proposition(name):
    """Checks that a proposition name is a non-empty identifier without whitespace

    Parameters
    ----------
    name : str
        Candidate proposition name

    Returns
    -------
    valid : bool
        True if name can be used as a proposition
    """

    return isinstance(name, str) and _PROPOSITION_RE.match(name) is not None and name not in _KEYWORDS


#--------------------------------
# Parsing and printing
#--------------------------------


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == '':
            break
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            bad = len(text) - len(text[pos:].lstrip())
            raise ERRORS.FormulaSyntaxError('Unexpected character {!r}'.format(text[bad]), bad)
        value = match.group('op') or match.group('ident')
        tokens.append((value, match.end() - len(value)))
        pos = match.end()
    tokens.append((None, len(text)))
    return tokens


class _Parser:
    """Recursive descent parser over the token list produced by _tokenize
    """

    def __init__(self, text, alphabet):
        self.tokens = _tokenize(text)
        self.index = 0
        self.alphabet = None if alphabet is None else frozenset(alphabet)


    def peek(self):
        return self.tokens[self.index][0]


    def position(self):
        return self.tokens[self.index][1]


    def advance(self):
        token = self.tokens[self.index]
        self.index += 1
        return token


    def expect(self, value):
        token, pos = self.advance()
        if token != value:
            found = 'end of input' if token is None else repr(token)
            raise ERRORS.FormulaSyntaxError('Expected {!r}, found {}'.format(value, found), pos)


    def parse(self):
        formula = self.parse_or()
        if self.peek() is not None:
            raise ERRORS.FormulaSyntaxError('Unexpected token {!r}'.format(self.peek()), self.position())
        return formula


    def parse_or(self):
        formula = self.parse_and()
        while self.peek() == '|':
            self.advance()
            formula = disj(formula, self.parse_and())
        return formula


    def parse_and(self):
        formula = self.parse_until()
        while self.peek() == '&':
            self.advance()
            formula = conj(formula, self.parse_until())
        return formula


    def parse_until(self):
        left = self.parse_unary()
        if self.peek() == 'U':
            self.advance()
            return until(left, self.parse_until())
        return left


    def parse_unary(self):
        token, pos = self.tokens[self.index]
        if token == '!':
            self.advance()
            operand = self.parse_unary()
            if operand.kind != KIND_ATOM:
                raise ERRORS.NegationOnCompoundError('Negation is only allowed directly on propositions (at position {})'.format(pos))
            return negated_atom(operand.name)
        if token == 'X':
            self.advance()
            return next_(self.parse_unary())
        if token == 'F':
            self.advance()
            return eventually(self.parse_unary())
        return self.parse_primary()


    def parse_primary(self):
        token, pos = self.advance()
        if token == '(':
            formula = self.parse_or()
            self.expect(')')
            return formula
        if token == 'true':
            return TRUE
        if token == 'false':
            return FALSE
        if token is None:
            raise ERRORS.FormulaSyntaxError('Unexpected end of input', pos)
        if token in _KEYWORDS or token in '&|)':
            raise ERRORS.FormulaSyntaxError('Unexpected token {!r}'.format(token), pos)
        if self.alphabet is not None and token not in self.alphabet:
            raise ERRORS.UnknownPropositionError('Proposition {!r} is not in the alphabet (at position {})'.format(token, pos))
        return atom(token)


def parse_formula(text, alphabet=None):
    """Parses formula text into a Formula

    Parameters
    ----------
    text : str
        Formula in concrete syntax, e.g. 'F (p & F d)'
    alphabet : iterable of str
        Declared propositions. If None, any well-formed identifier is accepted

    Returns
    -------
    formula : Formula
        The parsed syntax tree

    Raises
    ------
    FormulaSyntaxError
        Malformed text, with the failing position
    UnknownPropositionError
        Identifier outside the alphabet
    NegationOnCompoundError
        '!' applied to anything but a proposition
    """

    return _Parser(text, alphabet).parse()


def formula_to_string(formula):
    """Prints a formula so that parse_formula() rebuilds the same tree

    Binary operators are always parenthesized.

    Parameters
    ----------
    formula : Formula
        Formula to print

    Returns
    -------
    text : str
        Concrete syntax
    """

    kind = formula.kind
    if kind == KIND_ATOM:
        return formula.name
    if kind == KIND_NEG_ATOM:
        return '!{}'.format(formula.name)
    if kind == KIND_TRUE:
        return 'true'
    if kind == KIND_FALSE:
        return 'false'
    if kind == KIND_SATISFIED:
        return 'sat'
    if kind == KIND_NEXT:
        return 'X {}'.format(formula_to_string(formula.children[0]))
    if kind == KIND_EVENTUALLY:
        return 'F {}'.format(formula_to_string(formula.children[0]))
    symbol = {KIND_AND: '&', KIND_OR: '|', KIND_UNTIL: 'U'}[kind]
    left, right = formula.children
    return '({} {} {})'.format(formula_to_string(left), symbol, formula_to_string(right))


def formula_propositions(formula):
    """Collects the propositions a formula mentions

    Parameters
    ----------
    formula : Formula
        Formula to scan

    Returns
    -------
    propositions : frozenset of str
        Names of all atoms and negated atoms
    """

    if formula.name is not None:
        return frozenset([formula.name])
    names = set()
    for child in formula.children:
        names |= formula_propositions(child)
    return frozenset(names)


#--------------------------------
# Finite-word semantics
#--------------------------------


def evaluate_finite(formula, word):
    """Strong finite-trace satisfaction of a formula by a word

    Atoms read position 0 and are false on the empty word. Next needs position 1 to exist,
    eventually and until need a witness position inside the word.

    Parameters
    ----------
    formula : Formula
        Formula to evaluate
    word : sequence of iterables of str
        One set of true propositions per position

    Returns
    -------
    satisfied : bool
        True if the word satisfies the formula
    """

    symbols = [frozenset(symbol) for symbol in word]
    return _holds(formula, symbols, 0, {})


def _holds(formula, word, i, memo):
    key = (formula, i)
    if key in memo:
        return memo[key]
    n = len(word)
    kind = formula.kind
    if kind == KIND_SATISFIED:
        result = True
    elif kind == KIND_TRUE:
        result = i < n
    elif kind == KIND_FALSE:
        result = False
    elif kind == KIND_ATOM:
        result = i < n and formula.name in word[i]
    elif kind == KIND_NEG_ATOM:
        result = i < n and formula.name not in word[i]
    elif kind == KIND_AND:
        result = all(_holds(child, word, i, memo) for child in formula.children)
    elif kind == KIND_OR:
        result = any(_holds(child, word, i, memo) for child in formula.children)
    elif kind == KIND_NEXT:
        result = i + 1 < n and _holds(formula.children[0], word, i + 1, memo)
    elif kind == KIND_EVENTUALLY:
        result = any(_holds(formula.children[0], word, j, memo) for j in range(i, n))
    elif kind == KIND_UNTIL:
        left, right = formula.children
        result = False
        for j in range(i, n):
            if _holds(right, word, j, memo):
                result = True
                break
            if not _holds(left, word, j, memo):
                break
    else:
        raise ERRORS.FormulaError('Unknown formula kind {}'.format(kind))
    memo[key] = result
    return result


#--------------------------------
# Progression and normalization
#--------------------------------


def _operands(kind, formula):
    if formula.kind == kind:
        for child in formula.children:
            yield from _operands(kind, child)
    else:
        yield formula


def _fold(kind, operands):
    operands = sorted(set(operands), key=formula_to_string)
    result = operands[-1]
    for operand in reversed(operands[:-1]):
        result = Formula(kind, (operand, result))
    return result


def normalize_and(left, right):
    """Conjunction with flattening, sorting, idempotence and unit laws

    Parameters
    ----------
    left, right : Formula
        Normalized operands

    Returns
    -------
    formula : Formula
        Normalized conjunction
    """

    operands = set()
    for formula in itertools.chain(_operands(KIND_AND, left), _operands(KIND_AND, right)):
        if formula.kind == KIND_FALSE:
            return FALSE
        if formula.kind != KIND_SATISFIED:
            operands.add(formula)
    if len(operands) > 1:
        operands.discard(TRUE)
    for formula in operands:
        if formula.kind == KIND_ATOM and negated_atom(formula.name) in operands:
            return FALSE
    if not operands:
        return SATISFIED
    return _fold(KIND_AND, operands)


def normalize_or(left, right):
    """Disjunction with flattening, sorting, idempotence and unit laws

    Every residual other than SATISFIED is false on the empty word, so `true` absorbs it.

    Parameters
    ----------
    left, right : Formula
        Normalized operands

    Returns
    -------
    formula : Formula
        Normalized disjunction
    """

    operands = set()
    for formula in itertools.chain(_operands(KIND_OR, left), _operands(KIND_OR, right)):
        if formula.kind == KIND_SATISFIED:
            return SATISFIED
        if formula.kind != KIND_FALSE:
            operands.add(formula)
    if TRUE in operands:
        return TRUE
    for formula in operands:
        if formula.kind == KIND_ATOM and negated_atom(formula.name) in operands:
            return TRUE
    if not operands:
        return FALSE
    return _fold(KIND_OR, operands)


def normalize(formula):
    """Normalizes every and/or node of a formula bottom-up

    Parameters
    ----------
    formula : Formula
        Any formula

    Returns
    -------
    formula : Formula
        Equivalent normalized formula
    """

    kind = formula.kind
    if kind == KIND_AND:
        return normalize_and(normalize(formula.children[0]), normalize(formula.children[1]))
    if kind == KIND_OR:
        return normalize_or(normalize(formula.children[0]), normalize(formula.children[1]))
    if kind in (KIND_NEXT, KIND_EVENTUALLY, KIND_UNTIL):
        return Formula(kind, tuple(normalize(child) for child in formula.children))
    return formula


def progress(formula, symbol):
    """Single progression step: the residual the rest of the word has to satisfy

    Parameters
    ----------
    formula : Formula
        Normalized formula
    symbol : frozenset of str
        Propositions true at the consumed position

    Returns
    -------
    residual : Formula
        Normalized residual formula
    """

    kind = formula.kind
    if kind in (KIND_SATISFIED, KIND_FALSE):
        return formula
    if kind == KIND_TRUE:
        return SATISFIED
    if kind == KIND_ATOM:
        return SATISFIED if formula.name in symbol else FALSE
    if kind == KIND_NEG_ATOM:
        return FALSE if formula.name in symbol else SATISFIED
    if kind == KIND_AND:
        return normalize_and(progress(formula.children[0], symbol), progress(formula.children[1], symbol))
    if kind == KIND_OR:
        return normalize_or(progress(formula.children[0], symbol), progress(formula.children[1], symbol))
    if kind == KIND_NEXT:
        return formula.children[0]
    if kind == KIND_EVENTUALLY:
        return normalize_or(progress(formula.children[0], symbol), formula)
    if kind == KIND_UNTIL:
        left, right = formula.children
        return normalize_or(progress(right, symbol), normalize_and(progress(left, symbol), formula))
    raise ERRORS.FormulaError('Unknown formula kind {}'.format(kind))


#--------------------------------
# DFA
#--------------------------------


def all_symbols(alphabet):
    """Enumerates every subset of an alphabet in a fixed order

    Parameters
    ----------
    alphabet : iterable of str
        Propositions

    Returns
    -------
    symbols : list of frozenset
        Subsets ordered by size, then by sorted member names
    """

    names = sorted(alphabet)
    symbols = []
    for size in range(len(names) + 1):
        for combo in itertools.combinations(names, size):
            symbols.append(frozenset(combo))
    return symbols


class Dfa:
    """Deterministic finite automaton over symbols that are sets of propositions

    Symbols are projected on the automaton alphabet before lookup, so any label set can be
    read. Accepting states are absorbing.

    Attributes
    ----------
    alphabet : frozenset of str
        Propositions the automaton distinguishes
    states : tuple of int
        State ids 0..n-1
    initial : int
        Initial state id, always 0
    transitions : dict
        Map (state, frozenset symbol) -> state, total over states x subsets of alphabet
    accepting : frozenset of int
        Accepting state ids
    state_formulas : tuple of str
        Residual formula text of every state

    Methods
    -------
    step()
        Transition lookup
    accepts()
        Runs a whole word from the initial state
    is_accepting()
        Checks a state for acceptance
    dump()
        Deterministic text dump of states and edges
    """

    def __init__(self, alphabet, initial, transitions, accepting, state_formulas):
        """Constructor for Dfa
        """

        self.alphabet       = frozenset(alphabet)
        self.states         = tuple(range(len(state_formulas)))
        self.initial        = initial
        self.transitions    = dict(transitions)
        self.accepting      = frozenset(accepting)
        self.state_formulas = tuple(state_formulas)
        self._projected     = {}


    def step(self, state, symbol):
        """Transition lookup

        Parameters
        ----------
        state : int
            Current state
        symbol : iterable of str
            Label read; propositions outside the alphabet are ignored

        Returns
        -------
        next_state : int
            Successor state
        """

        if not 0 <= state < len(self.states):
            raise ERRORS.UnknownStateError('State {} is not part of the automaton'.format(state))
        if state in self.accepting:
            return state
        if isinstance(symbol, frozenset):
            projected = self._projected.get(symbol)
            if projected is None:
                projected = self._projected[symbol] = symbol & self.alphabet
        else:
            projected = frozenset(symbol) & self.alphabet
        return self.transitions[(state, projected)]


    def run(self, word, state=None):
        """Steps through a word

        Parameters
        ----------
        word : sequence of iterables of str
            Symbols to read
        state : int
            Start state, the initial state if None

        Returns
        -------
        state : int
            State after the last symbol
        """

        current = self.initial if state is None else state
        for symbol in word:
            current = self.step(current, symbol)
        return current


    def accepts(self, word):
        return self.run(word) in self.accepting


    def is_accepting(self, state):
        return state in self.accepting


    def dump(self):
        """Deterministic text dump of the automaton, used for golden tests

        Returns
        -------
        text : str
            Header lines, one line per state, one line per edge
        """

        lines = ['alphabet: {}'.format(' '.join(sorted(self.alphabet))),
                 'initial: {}'.format(self.initial),
                 'accepting: {}'.format(' '.join(str(q) for q in sorted(self.accepting)))]
        for state in self.states:
            lines.append('state {}: {}'.format(state, self.state_formulas[state]))
        for state in self.states:
            for symbol in all_symbols(self.alphabet):
                target = self.transitions[(state, symbol)]
                lines.append('{} --{{{}}}--> {}'.format(state, ','.join(sorted(symbol)), target))
        return '\n'.join(lines)


def translate_to_dfa(formula, alphabet=None, max_states=DEFAULT_MAX_STATES):
    """Builds the DFA whose language is exactly the words satisfying a formula

    Breadth-first exploration of normalized progression residuals. States are numbered in
    discovery order, with symbols visited in all_symbols() order.

    Parameters
    ----------
    formula : Formula
        scLTL formula
    alphabet : iterable of str
        Automaton alphabet, the formula's own propositions if None
    max_states : int
        State explosion guard

    Returns
    -------
    dfa : Dfa
        Automaton accepting exactly the satisfying words

    Raises
    ------
    DfaConstructionError
        More than max_states residuals were reached
    """

    if alphabet is None:
        alphabet = formula_propositions(formula)
    symbols = all_symbols(alphabet)
    start = normalize(formula)
    ids = {start: 0}
    order = [start]
    transitions = {}
    frontier = 0
    while frontier < len(order):
        current = order[frontier]
        for symbol in symbols:
            residual = progress(current, symbol)
            if residual not in ids:
                if len(order) >= max_states:
                    raise ERRORS.DfaConstructionError('DFA for {} exceeds {} states'.format(formula_to_string(formula), max_states))
                ids[residual] = len(order)
                order.append(residual)
            transitions[(frontier, symbol)] = ids[residual]
        frontier += 1
    accepting = [ids[SATISFIED]] if SATISFIED in ids else []
    return Dfa(alphabet, 0, transitions, accepting, [formula_to_string(state) for state in order])


def dfa_step(dfa, state, symbol):
    """DFA transition lookup

    Parameters
    ----------
    dfa : Dfa
        Automaton
    state : int
        Current state
    symbol : iterable of str
        Label read

    Returns
    -------
    next_state : int
        Successor state, the same state if it is accepting

    Raises
    ------
    UnknownStateError
        state is not a state of dfa
    """

    if state not in dfa.states:
        raise ERRORS.UnknownStateError('State {} is not part of the automaton'.format(state))
    return dfa.step(state, symbol)


#--------------------------------
# Request patterns
#--------------------------------


def pattern_for_name(name):
    """Resolves a pattern name or its short alias

    Parameters
    ----------
    name : str
        seq2, alt-then, then-alt or phi1, phi2, phi3

    Returns
    -------
    kind : str
        Canonical pattern name
    """

    kind = PATTERN_ALIASES.get(name, name)
    if kind not in PATTERN_ARITY:
        raise ERRORS.PatternArityError('Unknown request pattern {!r}'.format(name))
    return kind


def instantiate_pattern(kind, pick, destinations):
    """Builds a pick-up and drop-off request formula

    seq2      F(pick & F(d1 & F d2))
    alt-then  F(pick & F((d1 | d2) & d3))
    then-alt  F(pick & F(d1 & (d2 | d3)))

    Parameters
    ----------
    kind : str
        Pattern name, see pattern_for_name()
    pick : str
        Pick-up proposition
    destinations : list of str
        Destination propositions, 2 for seq2 and 3 otherwise

    Returns
    -------
    formula : Formula
        The instantiated pattern

    Raises
    ------
    PatternArityError
        Wrong number of destinations
    """

    kind = pattern_for_name(kind)
    expected = PATTERN_ARITY[kind]
    if len(destinations) != expected:
        raise ERRORS.PatternArityError('Pattern {} takes {} destinations, got {}'.format(kind, expected, len(destinations)))
    d = [atom(name) for name in destinations]
    if kind == 'seq2':
        body = conj(d[0], eventually(d[1]))
    elif kind == 'alt-then':
        body = conj(disj(d[0], d[1]), d[2])
    else:
        body = conj(d[0], disj(d[1], d[2]))
    return eventually(conj(atom(pick), eventually(body)))
