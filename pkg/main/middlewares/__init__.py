from .access_log import AccessLogMiddleware
