"""Paquete de configuración"""