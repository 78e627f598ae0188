from momentsos.utils.serialization import dumps, json_float, to_jsonable

__all__ = ['dumps', 'json_float', 'to_jsonable']
