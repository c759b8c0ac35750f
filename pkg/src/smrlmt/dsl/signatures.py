"""Static signatures of the function library, data-model accessors and operators.

Kinds are plain strings: ``bool``, ``int``, ``string``, ``Input``, ``Action``,
``User``, ``Session``, ``Output``, ``Page``, ``Param``, ``list:<kind>`` and the
wildcard ``any``. Functions may be overloaded by listing several signatures.
"""

from __future__ import annotations

Signature = tuple[tuple[str, ...], str]

DATA_SIGNATURES: dict[str, list[Signature]] = {
    "Input": [(("int",), "Input")],
    "Action": [(("int",), "Action")],
    "Session": [(("int",), "Session")],
    "User": [(("int",), "User")],
    "Output": [(("Input",), "Output"), (("Input", "int"), "Page")],
    "HttpMethod": [((), "string")],
    "RandomFilePath": [((), "string")],
    "RandomValue": [(("string",), "any")],
}

WEB_SIGNATURES: dict[str, list[Signature]] = {
    "changeCredentials": [(("Input", "User"), "Input")],
    "copyActionTo": [(("Input", "int", "int"), "Input"), (("Input", "Action", "int"), "Input")],
    "cannotReachThroughGUI": [(("User", "string"), "bool")],
    "isSupervisorOf": [(("User", "User"), "bool")],
    "isLogin": [(("Action",), "bool")],
    "afterLogin": [(("Action",), "bool")],
    "isSignup": [(("Action",), "bool")],
    "isError": [(("Page",), "bool")],
    "userCanRetrieveContent": [(("User", "Page"), "bool")],
    "setChannel": [(("Action", "string"), "Action"), (("Input", "int", "string"), "Input")],
    "setParameterValue": [(("Input", "int", "int", "any"), "Input")],
    "parameterCount": [(("Action",), "int")],
    "sessionIdOf": [(("Page",), "string")],
}

ACCESSORS: dict[str, dict[str, str]] = {
    "Input": {"actions": "list:Action", "length": "int", "user": "User", "id": "string"},
    "Action": {
        "url": "string",
        "method": "string",
        "channel": "string",
        "position": "int",
        "parameters": "list:Param",
        "user": "User",
        "session": "Session",
    },
    "Param": {"name": "string", "value": "string", "position": "int"},
    "User": {"id": "string", "username": "string", "password": "string", "role": "string"},
    "Session": {"id": "string"},
    "Output": {"pages": "list:Page", "length": "int"},
    "Page": {"body": "string", "status": "int", "sessionId": "string", "url": "string"},
}
LIST_ACCESSORS = {"length": "int"}

# (min, max) argument counts; None = variadic
OP_ARITY: dict[str, tuple[int, int | None]] = {
    "IMPLIES": (2, 2),
    "AND": (2, None),
    "OR": (2, None),
    "EQUAL": (2, 2),
    "NOT": (1, 1),
    "TRUE": (0, 0),
    "FALSE": (0, 0),
}

RANDOM_VALUE_TYPES = ("int", "string", "boolean")


def compatible(actual: str, expected: str) -> bool:
    return actual == expected or "any" in (actual, expected)


def accessor_kind(target: str, name: str) -> str | None:
    if target.startswith("list:"):
        return LIST_ACCESSORS.get(name)
    return ACCESSORS.get(target, {}).get(name)
