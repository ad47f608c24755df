"""Paquete principal de reconstruccion de fronteras y simulacion dendritica"""
