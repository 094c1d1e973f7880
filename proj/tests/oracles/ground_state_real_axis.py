# Independent check of the K=1 ground state near eps = -1: integrates along the
# real axis (inside both Stokes wedges) with scipy DOP853 and solves W(E) = 0
# with an mpmath secant. Slow (a few minutes).
import numpy as np, mpmath as mp
from scipy.integrate import solve_ivp
def W(E, eps, X=16.0):
    vals=[]
    for sgn in (1,-1):
        # x = sgn*r, r from X to 0
        def V(r):
            x = sgn*r
            return x*x*np.exp(eps*np.log(1j*x+0j))  # principal branch, cut on +i axis
        def f(r,y):
            psi,dpsi=y[0]+1j*y[1],y[2]+1j*y[3]   # derivatives w.r.t. r; d2/dr2 = d2/dx2
            dd=(V(r)-E)*psi
            return [dpsi.real,dpsi.imag,dd.real,dd.imag]
        v=V(X); k=np.sqrt(v-E)
        if k.real<0: k=-k
        y0=[1,0,(-k).real,(-k).imag]
        s=solve_ivp(f,(X,0),y0,method='DOP853',rtol=1e-13,atol=1e-300)
        y=s.y[:,-1]; psi=y[0]+1j*y[1]; dpsi_r=y[2]+1j*y[3]
        vals.append((psi, sgn*dpsi_r))  # d/dx = sgn d/dr
    (pR,dR),(pL,dL)=vals
    return (pL*dR-pR*dL)/max(abs(pL*dR),abs(pR*dL))
for k,g in [(1,1.68),(2,2.68),(3,3.49),(4,4.18),(5,4.78),(6,5.33),(7,5.86)]:
    eps=-1+10.0**-k
    r=mp.findroot(lambda E: complex(W(complex(E),eps)), mp.mpc(g), solver='secant', tol=1e-20)
    print(k, r)
