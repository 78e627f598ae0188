from momentsos.schemas.problem_schema import ProblemFile, load_problem, parse_problem

__all__ = ['ProblemFile', 'load_problem', 'parse_problem']
